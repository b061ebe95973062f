#pragma once

#include <span>
#include <vector>

#include "graphwave/se3.hpp"

namespace graphwave {

/// Default timestamp association tolerance in seconds.
inline constexpr double kDefaultAssociationTolerance = 0.05;

struct StampedPose {
  double timestamp = 0.0;
  Pose pose;
};

/// Time-ordered poses of a single robot. Timestamps strictly increase.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws ValidationError on non-increasing timestamps.
  explicit Trajectory(std::vector<StampedPose> samples);

  const std::vector<StampedPose>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const StampedPose& operator[](std::size_t i) const { return samples_[i]; }
  const StampedPose& front() const { return samples_.front(); }
  const StampedPose& back() const { return samples_.back(); }

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

 private:
  std::vector<StampedPose> samples_;
};

/// Indices of the samples kept by keyframe_select.
std::vector<std::size_t> keyframe_indices(const Trajectory& trajectory, double min_dist,
                                          double min_rot);

/// Keeps the first sample, then every sample at least `min_dist` meters or
/// `min_rot` radians away from the previously kept one.
Trajectory keyframe_select(const Trajectory& trajectory, double min_dist, double min_rot);

/// Right-composes every relative motion ending inside (start_t, end_t] with
/// exp(bias). The accumulated error carries over to the rest of the trajectory.
Trajectory inject_drift(const Trajectory& trajectory, double start_t, double end_t,
                        const Twist& bias_per_step);

/// Scales the component of each relative translation along `axis` (body frame)
/// by `beta` inside (start_t, end_t]. beta = 0 models a robot that believes it
/// is stuck. Rotations are untouched.
Trajectory inject_degeneracy(const Trajectory& trajectory, double start_t, double end_t,
                             const Eigen::Vector3d& axis, double beta);

/// Index pairs (estimate, ground truth) matched greedily by nearest timestamp.
std::vector<std::pair<std::size_t, std::size_t>> associate(
    const Trajectory& estimate, const Trajectory& ground_truth,
    double tolerance = kDefaultAssociationTolerance);

struct AteReport {
  double rmse = 0.0;
  /// Rotation RMSE in radians after the same alignment, reported but not optimized.
  double rotation_rmse = 0.0;
  std::size_t pairs = 0;
};

AteReport absolute_trajectory_error(const Trajectory& estimate, const Trajectory& ground_truth,
                                    bool align,
                                    double tolerance = kDefaultAssociationTolerance);

/// Position RMSE. With `align`, a rigid (no scale) least-squares alignment is applied first.
double ate_rmse(const Trajectory& estimate, const Trajectory& ground_truth, bool align,
                double tolerance = kDefaultAssociationTolerance);

}  // namespace graphwave
