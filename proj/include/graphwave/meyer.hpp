#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "graphwave/spectral.hpp"

namespace graphwave {

/// Meyer band-pass window on the normalized axis, supported on [2/3, 8/3].
double meyer_wavelet_kernel(double x);
/// Meyer low-pass window: 1 below 2/3, smooth roll-off to 0 at 4/3.
double meyer_scaling_kernel(double x);

/// Spectral filter bank: one low-pass band h(s_J lambda) followed by J
/// band-pass bands g(s_j lambda). Scales ascend, so band 1 (smallest scale)
/// is the finest and band J the coarsest wavelet band; band 0 is the
/// scaling band and coarser than all of them.
class FilterBank {
 public:
  /// Throws ParameterError unless lambda_max > 0 and scales are positive and ascending.
  FilterBank(double lambda_max, std::vector<double> scales);

  double lambda_max() const { return lambda_max_; }
  const std::vector<double>& scales() const { return scales_; }
  std::size_t wavelet_count() const { return scales_.size(); }
  std::size_t band_count() const { return scales_.size() + 1; }

  double scaling(double lambda) const;
  /// Band-pass kernel at wavelet index j in [0, J).
  double wavelet(std::size_t j, double lambda) const;
  /// Band 0 is the scaling band, band b >= 1 is wavelet b - 1.
  double band(std::size_t b, double lambda) const;

  /// Sum of squared responses, h^2 + sum_j g_j^2.
  double frame(double lambda) const;
  /// Min and max of frame() on `points` evenly spaced samples of [0, lambda_max].
  std::pair<double, double> frame_bounds(std::size_t points = 1000) const;

 private:
  double lambda_max_;
  std::vector<double> scales_;
};

inline constexpr int kMaxWaveletScales = 9;

/// Dyadic Meyer bank: the finest band-pass peaks at lambda_max and each
/// coarser band sits an octave lower. 1 <= num_scales <= 9.
FilterBank make_meyer_bank(double lambda_max, int num_scales);

/// Per-node, per-band wavelet coefficients: column b holds U G_b(Lambda) U^T f.
/// Row n is the multiscale feature vector of node n.
struct WaveletCoefficients {
  Eigen::MatrixXd values;

  Eigen::Index nodes() const { return values.rows(); }
  Eigen::Index bands() const { return values.cols(); }
};

WaveletCoefficients wavelet_coefficients(const LaplacianDecomposition& decomp,
                                         const FilterBank& bank, const Eigen::VectorXd& signal);

/// Localized wavelets of one band: column n is psi_{s,n} = U G_s U^T delta_n.
Eigen::MatrixXd wavelet_atoms(const LaplacianDecomposition& decomp, const FilterBank& bank,
                              std::size_t band);

}  // namespace graphwave
