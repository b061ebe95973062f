#include "graphwave/se3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "graphwave/errors.hpp"

namespace graphwave {
namespace {

// Below this angle the closed forms lose precision and Taylor series take over.
constexpr double kSmallAngle = 1e-4;
// Angles within this distance of pi are treated as the ambiguous half turn.
constexpr double kHalfTurnTolerance = 1e-10;

}  // namespace

Pose::Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  // Leave already-unit quaternions bit-identical so text round trips are stable.
  if (std::abs(rotation_.squaredNorm() - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
    rotation_.normalize();
  }
}

Pose Pose::from_yaw(double yaw, const Eigen::Vector3d& t) {
  return {Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())), t};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

Pose Pose::operator*(const Pose& rhs) const {
  return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

double Pose::angle() const {
  return 2.0 * std::atan2(rotation_.vec().norm(), std::abs(rotation_.w()));
}

MetricWeights::MetricWeights(double translation_weight, double rotation_weight)
    : translation_(translation_weight), rotation_(rotation_weight) {
  if (!(translation_weight >= 0.0) || !(rotation_weight >= 0.0)) {
    throw ParameterError("metric weights must be non-negative");
  }
  if (translation_weight == 0.0 && rotation_weight == 0.0) {
    throw ParameterError("metric weights must not both be zero");
  }
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  if (theta < kSmallAngle) {
    const Eigen::Matrix3d k = skew(phi);
    return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  }
  return Eigen::AngleAxisd(theta, phi / theta).toRotationMatrix();
}

namespace {

// Either axis sign is returned at a half turn.
Eigen::Vector3d so3_log_any(const Eigen::Quaterniond& q_in, double* angle) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double n = q.vec().norm();
  const double w = q.w();
  const double theta = 2.0 * std::atan2(n, w);
  if (angle) *angle = theta;
  // theta / n, with its series near zero.
  const double scale = n < 1e-8 ? 2.0 / w - (2.0 / 3.0) * n * n / (w * w * w) : theta / n;
  return scale * q.vec();
}

}  // namespace

Eigen::Vector3d so3_log(const Eigen::Quaterniond& q_in) {
  double theta = 0.0;
  const Eigen::Vector3d phi = so3_log_any(q_in, &theta);
  if (std::numbers::pi - theta < kHalfTurnTolerance) {
    throw BranchAmbiguityError("logarithm undefined for a rotation of pi");
  }
  return phi;
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  double a, b;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = (1.0 - std::cos(theta)) / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = 1.0 / (theta * theta) - 1.0 / (2.0 * theta * std::tan(0.5 * theta));
  }
  return Eigen::Matrix3d::Identity() - 0.5 * k + c * k * k;
}

Pose exp_map(const Twist& xi) {
  const double theta = xi.phi.norm();
  Eigen::Quaterniond q;
  if (theta < kSmallAngle) {
    const double half = 0.5 - theta * theta / 48.0;
    q = Eigen::Quaterniond(1.0 - theta * theta / 8.0, half * xi.phi.x(), half * xi.phi.y(),
                           half * xi.phi.z());
  } else {
    q = Eigen::Quaterniond(Eigen::AngleAxisd(theta, xi.phi / theta));
  }
  return {q, so3_left_jacobian(xi.phi) * xi.rho};
}

Twist log_map(const Pose& pose) {
  const Eigen::Vector3d phi = so3_log(pose.rotation());
  return {so3_left_jacobian_inverse(phi) * pose.translation(), phi};
}

Eigen::Matrix4d hat(const Twist& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.phi);
  m.topRightCorner<3, 1>() = xi.rho;
  return m;
}

Matrix6d adjoint(const Pose& pose) {
  const Eigen::Matrix3d r = pose.rotation_matrix();
  Matrix6d ad = Matrix6d::Zero();
  ad.topLeftCorner<3, 3>() = r;
  ad.topRightCorner<3, 3>() = skew(pose.translation()) * r;
  ad.bottomRightCorner<3, 3>() = r;
  return ad;
}

namespace {

// Off-diagonal block of the SE(3) left Jacobian.
Eigen::Matrix3d left_jacobian_q(const Eigen::Vector3d& rho, const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d p = skew(phi);
  const Eigen::Matrix3d r = skew(rho);
  double c1, c2, c3;
  if (theta < 1e-2) {
    const double t2 = theta * theta;
    c1 = 1.0 / 6.0 - t2 / 120.0;
    c2 = 1.0 / 24.0 - t2 / 720.0;
    c3 = 1.0 / 120.0 - t2 / 2520.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double t2 = theta * theta;
    c1 = (theta - s) / (t2 * theta);
    c2 = (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2);
    c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t2 * t2 * theta);
  }
  const Eigen::Matrix3d pr = p * r;
  const Eigen::Matrix3d rp = r * p;
  const Eigen::Matrix3d prp = pr * p;
  return 0.5 * r + c1 * (pr + rp + prp) + c2 * (p * pr + rp * p - 3.0 * prp) +
         c3 * (prp * p + p * prp);
}

Matrix6d se3_left_jacobian(const Twist& xi) {
  const Eigen::Matrix3d j = so3_left_jacobian(xi.phi);
  Matrix6d out = Matrix6d::Zero();
  out.topLeftCorner<3, 3>() = j;
  out.topRightCorner<3, 3>() = left_jacobian_q(xi.rho, xi.phi);
  out.bottomRightCorner<3, 3>() = j;
  return out;
}

Matrix6d se3_left_jacobian_inverse(const Twist& xi) {
  const Eigen::Matrix3d j_inv = so3_left_jacobian_inverse(xi.phi);
  Matrix6d out = Matrix6d::Zero();
  out.topLeftCorner<3, 3>() = j_inv;
  out.topRightCorner<3, 3>() = -j_inv * left_jacobian_q(xi.rho, xi.phi) * j_inv;
  out.bottomRightCorner<3, 3>() = j_inv;
  return out;
}

}  // namespace

Matrix6d se3_right_jacobian(const Twist& xi) { return se3_left_jacobian(-xi); }

Matrix6d se3_right_jacobian_inverse(const Twist& xi) { return se3_left_jacobian_inverse(-xi); }

double se3_distance(const Pose& a, const Pose& b, const MetricWeights& weights) {
  const Twist xi = log_map(a.inverse() * b);
  return std::sqrt(weights.translation() * xi.rho.squaredNorm() +
                   weights.rotation() * xi.phi.squaredNorm());
}

double se3_distance_any_branch(const Pose& a, const Pose& b, const MetricWeights& weights) {
  // |rho| and |phi| do not depend on the axis sign at a half turn.
  const Pose d = a.inverse() * b;
  const Eigen::Vector3d phi = so3_log_any(d.rotation(), nullptr);
  const Twist xi{so3_left_jacobian_inverse(phi) * d.translation(), phi};
  return std::sqrt(weights.translation() * xi.rho.squaredNorm() +
                   weights.rotation() * xi.phi.squaredNorm());
}

double rotation_distance(const Pose& a, const Pose& b) {
  return (b.rotation_matrix() * a.rotation_matrix().transpose()).trace();
}

double rotation_angle_distance(const Pose& a, const Pose& b) {
  const double c = std::clamp((rotation_distance(a, b) - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

double sq_exp_weight(double delta, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
  if (!(delta >= 0.0)) throw ParameterError("distance must be non-negative");
  return std::exp(-delta / (2.0 * sigma * sigma));
}

double sigma_for_weight(double distance, double weight) {
  if (!(distance > 0.0) || !(weight > 0.0 && weight < 1.0)) {
    throw ParameterError("sigma_for_weight needs distance > 0 and weight in (0,1)");
  }
  return std::sqrt(distance / (2.0 * -std::log(weight)));
}

}  // namespace graphwave
