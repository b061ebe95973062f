#include "graphwave/meyer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "graphwave/errors.hpp"

namespace graphwave {
namespace {

constexpr double kL1 = 2.0 / 3.0;
constexpr double kL2 = 4.0 / 3.0;
constexpr double kL3 = 8.0 / 3.0;

// Transition polynomial: 0 at 0, 1 at 1, flat to third order at both ends.
double nu(double x) { return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x); }

}  // namespace

double meyer_wavelet_kernel(double x) {
  x = std::abs(x);
  if (x >= kL1 && x < kL2) return std::sin(std::numbers::pi / 2.0 * nu(x / kL1 - 1.0));
  if (x >= kL2 && x < kL3) return std::cos(std::numbers::pi / 2.0 * nu(x / kL2 - 1.0));
  return 0.0;
}

double meyer_scaling_kernel(double x) {
  x = std::abs(x);
  if (x < kL1) return 1.0;
  if (x < kL2) return std::cos(std::numbers::pi / 2.0 * nu(x / kL1 - 1.0));
  return 0.0;
}

FilterBank::FilterBank(double lambda_max, std::vector<double> scales)
    : lambda_max_(lambda_max), scales_(std::move(scales)) {
  if (!(lambda_max_ > 0.0)) throw ParameterError("lambda_max must be positive");
  if (scales_.empty()) throw ParameterError("filter bank needs at least one scale");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (!(scales_[i] > 0.0)) throw ParameterError("scales must be positive");
    if (i > 0 && !(scales_[i] > scales_[i - 1])) throw ParameterError("scales must ascend");
  }
}

double FilterBank::scaling(double lambda) const { return meyer_scaling_kernel(scales_.back() * lambda); }

double FilterBank::wavelet(std::size_t j, double lambda) const {
  return meyer_wavelet_kernel(scales_.at(j) * lambda);
}

double FilterBank::band(std::size_t b, double lambda) const {
  return b == 0 ? scaling(lambda) : wavelet(b - 1, lambda);
}

double FilterBank::frame(double lambda) const {
  double sum = 0.0;
  for (std::size_t b = 0; b < band_count(); ++b) {
    const double g = band(b, lambda);
    sum += g * g;
  }
  return sum;
}

std::pair<double, double> FilterBank::frame_bounds(std::size_t points) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < points; ++i) {
    const double lambda = points > 1 ? lambda_max_ * static_cast<double>(i) / (points - 1) : 0.0;
    const double f = frame(lambda);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return {lo, hi};
}

FilterBank make_meyer_bank(double lambda_max, int num_scales) {
  if (!(lambda_max > 0.0)) throw ParameterError("lambda_max must be positive");
  if (num_scales < 1 || num_scales > kMaxWaveletScales) {
    throw ParameterError("number of wavelet scales must be in [1, 9]");
  }
  // g(s lambda) peaks where s lambda = 4/3, so the smallest scale peaks at lambda_max.
  std::vector<double> scales;
  for (int j = 0; j < num_scales; ++j) scales.push_back(kL2 / lambda_max * std::ldexp(1.0, j));
  return {lambda_max, std::move(scales)};
}

WaveletCoefficients wavelet_coefficients(const LaplacianDecomposition& decomp,
                                         const FilterBank& bank, const Eigen::VectorXd& signal) {
  const Eigen::VectorXd spectrum = gft(decomp, signal);
  const auto n = static_cast<Eigen::Index>(decomp.size());
  WaveletCoefficients out{Eigen::MatrixXd(n, static_cast<Eigen::Index>(bank.band_count()))};
  Eigen::VectorXd filtered(n);
  for (std::size_t b = 0; b < bank.band_count(); ++b) {
    for (Eigen::Index l = 0; l < n; ++l) filtered(l) = bank.band(b, decomp.eigenvalues(l)) * spectrum(l);
    out.values.col(static_cast<Eigen::Index>(b)) = decomp.eigenvectors * filtered;
  }
  return out;
}

Eigen::MatrixXd wavelet_atoms(const LaplacianDecomposition& decomp, const FilterBank& bank,
                              std::size_t band) {
  if (band >= bank.band_count()) throw DimensionError("band index out of range");
  const auto n = static_cast<Eigen::Index>(decomp.size());
  Eigen::VectorXd g(n);
  for (Eigen::Index l = 0; l < n; ++l) g(l) = bank.band(band, decomp.eigenvalues(l));
  return decomp.eigenvectors * g.asDiagonal() * decomp.eigenvectors.transpose();
}

}  // namespace graphwave
