#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace graphwave {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Element of se(3). Ordering is translation first: (rho, phi).
struct Twist {
  Eigen::Vector3d rho = Eigen::Vector3d::Zero();
  Eigen::Vector3d phi = Eigen::Vector3d::Zero();

  Twist() = default;
  Twist(const Eigen::Vector3d& rho_in, const Eigen::Vector3d& phi_in) : rho(rho_in), phi(phi_in) {}

  static Twist from_vector(const Vector6d& v) { return {v.head<3>(), v.tail<3>()}; }
  Vector6d vector() const {
    Vector6d v;
    v << rho, phi;
    return v;
  }
  Twist operator-() const { return {-rho, -phi}; }
};

/// Rigid transform in SE(3): unit quaternion plus translation in meters.
///
/// The quaternion is renormalized on construction and after every
/// composition so repeated products do not leave the group.
class Pose {
 public:
  Pose() = default;
  Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return {}; }
  static Pose from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Quaterniond::Identity(), t};
  }
  static Pose from_yaw(double yaw, const Eigen::Vector3d& t = Eigen::Vector3d::Zero());

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const {
    return rotation_ * point + translation_;
  }

  /// Rotation angle in [0, pi].
  double angle() const;

 private:
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Per-component weights of the SE(3) distance. Both non-negative, not both zero.
class MetricWeights {
 public:
  MetricWeights() = default;
  MetricWeights(double translation_weight, double rotation_weight);

  double translation() const { return translation_; }
  double rotation() const { return rotation_; }

 private:
  double translation_ = 1.0;
  double rotation_ = 1.0;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& phi);
/// Throws BranchAmbiguityError for a rotation of pi.
Eigen::Vector3d so3_log(const Eigen::Quaterniond& q);
/// Left Jacobian of SO(3) and its inverse.
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi);
Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& phi);

Pose exp_map(const Twist& xi);
Twist log_map(const Pose& pose);

/// 4x4 matrix form of a twist (the hat operator).
Eigen::Matrix4d hat(const Twist& xi);

/// Adjoint of a pose acting on (rho, phi) twists.
Matrix6d adjoint(const Pose& pose);

/// Right Jacobian of SE(3) and its inverse, in (rho, phi) ordering.
Matrix6d se3_right_jacobian(const Twist& xi);
Matrix6d se3_right_jacobian_inverse(const Twist& xi);

/// Weighted norm of log(a^-1 b): sqrt(wt*|rho|^2 + wr*|phi|^2).
double se3_distance(const Pose& a, const Pose& b, const MetricWeights& weights = {});

/// Same value as se3_distance, but defined at a half turn too.
double se3_distance_any_branch(const Pose& a, const Pose& b, const MetricWeights& weights = {});

/// Trace of R_b R_a^T. Equals 3 for identical rotations, -1 for a half turn.
double rotation_distance(const Pose& a, const Pose& b);

/// Angle between two rotations, arccos((tr - 1) / 2); grows with dissimilarity.
double rotation_angle_distance(const Pose& a, const Pose& b);

/// exp(-delta / (2 sigma^2)).
double sq_exp_weight(double delta, double sigma);

/// Sigma such that the weight at `distance` equals `weight`.
double sigma_for_weight(double distance, double weight);

}  // namespace graphwave
