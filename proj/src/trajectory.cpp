#include "graphwave/trajectory.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <string>

#include "graphwave/errors.hpp"

namespace graphwave {
namespace {

// Slack on keyframe thresholds so exact multiples survive rounding.
constexpr double kThresholdSlack = 1e-9;

bool in_window(double t, double start_t, double end_t) { return t > start_t && t <= end_t; }

template <typename Modify>
Trajectory rewrite_relative_motions(const Trajectory& trajectory, double start_t, double end_t,
                                    Modify modify) {
  if (trajectory.empty() || !(start_t < end_t)) return trajectory;
  std::vector<StampedPose> out;
  out.reserve(trajectory.size());
  out.push_back(trajectory.front());
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    Pose rel = trajectory[i - 1].pose.inverse() * trajectory[i].pose;
    if (in_window(trajectory[i].timestamp, start_t, end_t)) rel = modify(rel);
    out.push_back({trajectory[i].timestamp, out.back().pose * rel});
  }
  return Trajectory(std::move(out));
}

}  // namespace

Trajectory::Trajectory(std::vector<StampedPose> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].timestamp > samples_[i - 1].timestamp)) {
      throw ValidationError("trajectory timestamps must strictly increase (sample " +
                            std::to_string(i) + ")");
    }
  }
}

std::vector<std::size_t> keyframe_indices(const Trajectory& trajectory, double min_dist,
                                          double min_rot) {
  if (!(min_dist > 0.0) && !(min_rot > 0.0)) {
    throw ParameterError("keyframe selection needs min_dist > 0 or min_rot > 0");
  }
  std::vector<std::size_t> kept;
  if (trajectory.empty()) return kept;
  kept.push_back(0);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const Pose rel = trajectory[kept.back()].pose.inverse() * trajectory[i].pose;
    const bool moved = min_dist > 0.0 && rel.translation().norm() >= min_dist - kThresholdSlack;
    const bool turned = min_rot > 0.0 && rel.angle() >= min_rot - kThresholdSlack;
    if (moved || turned) kept.push_back(i);
  }
  return kept;
}

Trajectory keyframe_select(const Trajectory& trajectory, double min_dist, double min_rot) {
  std::vector<StampedPose> out;
  for (std::size_t i : keyframe_indices(trajectory, min_dist, min_rot)) {
    out.push_back(trajectory[i]);
  }
  return Trajectory(std::move(out));
}

Trajectory inject_drift(const Trajectory& trajectory, double start_t, double end_t,
                        const Twist& bias_per_step) {
  const Pose step = exp_map(bias_per_step);
  return rewrite_relative_motions(trajectory, start_t, end_t,
                                  [&](const Pose& rel) { return rel * step; });
}

Trajectory inject_degeneracy(const Trajectory& trajectory, double start_t, double end_t,
                             const Eigen::Vector3d& axis, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("beta must lie in [0, 1)");
  const double n = axis.norm();
  if (!(n > 0.0)) throw ParameterError("degeneracy axis must be non-zero");
  const Eigen::Vector3d a = axis / n;
  return rewrite_relative_motions(trajectory, start_t, end_t, [&](const Pose& rel) {
    const Eigen::Vector3d t = rel.translation();
    return Pose(rel.rotation(), t - (1.0 - beta) * t.dot(a) * a);
  });
}

std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& estimate,
                                                           const Trajectory& ground_truth,
                                                           double tolerance) {
  struct Candidate {
    double gap;
    std::size_t est;
    std::size_t gt;
  };
  std::vector<Candidate> candidates;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double t = estimate[i].timestamp;
    while (lo < ground_truth.size() && ground_truth[lo].timestamp < t - tolerance) ++lo;
    for (std::size_t j = lo; j < ground_truth.size() && ground_truth[j].timestamp <= t + tolerance;
         ++j) {
      candidates.push_back({std::abs(ground_truth[j].timestamp - t), i, j});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });
  std::vector<bool> used_est(estimate.size(), false);
  std::vector<bool> used_gt(ground_truth.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const Candidate& c : candidates) {
    if (used_est[c.est] || used_gt[c.gt]) continue;
    used_est[c.est] = used_gt[c.gt] = true;
    pairs.emplace_back(c.est, c.gt);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

AteReport absolute_trajectory_error(const Trajectory& estimate, const Trajectory& ground_truth,
                                    bool align, double tolerance) {
  const auto pairs = associate(estimate, ground_truth, tolerance);
  if (pairs.empty()) throw InsufficientDataError("no associated timestamps");
  if (align && pairs.size() < 3) {
    throw InsufficientDataError("rigid alignment needs at least 3 associated poses, got " +
                                std::to_string(pairs.size()));
  }

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::Matrix3Xd est(3, n), gt(3, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    est.col(k) = estimate[pairs[k].first].pose.translation();
    gt.col(k) = ground_truth[pairs[k].second].pose.translation();
  }

  Pose alignment;
  if (align) {
    const Eigen::Matrix4d t = Eigen::umeyama(est, gt, false);
    alignment = Pose(Eigen::Quaterniond(Eigen::Matrix3d(t.topLeftCorner<3, 3>())),
                     t.topRightCorner<3, 1>());
  }

  double pos_sq = 0.0;
  double rot_sq = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Pose aligned = alignment * estimate[pairs[k].first].pose;
    const Pose& truth = ground_truth[pairs[k].second].pose;
    pos_sq += (aligned.translation() - truth.translation()).squaredNorm();
    const double angle = (truth.inverse() * aligned).angle();
    rot_sq += angle * angle;
  }
  return {std::sqrt(pos_sq / static_cast<double>(n)), std::sqrt(rot_sq / static_cast<double>(n)),
          pairs.size()};
}

double ate_rmse(const Trajectory& estimate, const Trajectory& ground_truth, bool align,
                double tolerance) {
  return absolute_trajectory_error(estimate, ground_truth, align, tolerance).rmse;
}

}  // namespace graphwave
