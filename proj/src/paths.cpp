#include "graphwave/paths.hpp"

#include <cmath>
#include <numbers>

#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"

namespace graphwave {
namespace {

double wrap(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

Pose planar(const Eigen::Vector2d& p, double z, double yaw) {
  return Pose(Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())),
              Eigen::Vector3d(p.x(), p.y(), z));
}

std::size_t sample_count(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

Trajectory circle(const PathSpec& s, double duration, double dt) {
  const Eigen::Vector2d start = s.start.head<2>();
  const Eigen::Vector2d center =
      start + s.radius * Eigen::Vector2d(-std::sin(s.start_yaw), std::cos(s.start_yaw));
  const double phase0 = std::atan2(start.y() - center.y(), start.x() - center.x());
  const double rate = s.speed / s.radius;
  std::vector<StampedPose> out;
  const std::size_t n = sample_count(duration, dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double a = rate * t;
    const Eigen::Vector2d p = center + s.radius * Eigen::Vector2d(std::cos(phase0 + a), std::sin(phase0 + a));
    out.push_back({t, planar(p, s.start.z(), s.start_yaw + a)});
  }
  return Trajectory(std::move(out));
}

std::vector<Eigen::Vector2d> waypoint_cycle(const PathSpec& s) {
  const Eigen::Vector2d o = s.start.head<2>();
  const Eigen::Vector2d fwd(std::cos(s.start_yaw), std::sin(s.start_yaw));
  const Eigen::Vector2d left(-fwd.y(), fwd.x());
  std::vector<Eigen::Vector2d> pts{o};
  switch (s.kind) {
    case PathKind::corridor:
      pts.push_back(o + s.length * fwd);
      break;
    case PathKind::lawnmower: {
      const auto rows = static_cast<int>(std::floor(s.width / s.spacing + 1e-9)) + 1;
      for (int r = 0; r < rows; ++r) {
        const Eigen::Vector2d base = o + r * s.spacing * left;
        if (r % 2 == 0) {
          if (r > 0) pts.push_back(base);
          pts.push_back(base + s.length * fwd);
        } else {
          pts.push_back(base + s.length * fwd);
          pts.push_back(base);
        }
      }
      break;
    }
    case PathKind::polyline:
      pts.insert(pts.end(), s.waypoints.begin(), s.waypoints.end());
      break;
    default:
      break;
  }
  return pts;
}

Trajectory follow(const PathSpec& s, double duration, double dt) {
  const auto pts = waypoint_cycle(s);
  Eigen::Vector2d pos = pts.front();
  double yaw = s.start_yaw;
  std::size_t target = 1 % pts.size();
  std::vector<StampedPose> out;
  const std::size_t n = sample_count(duration, dt);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      double budget = s.speed * dt;
      double turn_budget = s.turn_rate * dt;
      // A step may finish a turn and a leg; stop once both budgets are spent.
      for (int guard = 0; guard < 8 && (budget > 0.0 && turn_budget >= 0.0); ++guard) {
        const Eigen::Vector2d to = pts[target] - pos;
        const double dist = to.norm();
        if (dist < 1e-12) {
          target = (target + 1) % pts.size();
          continue;
        }
        const double err = wrap(std::atan2(to.y(), to.x()) - yaw);
        if (std::abs(err) > 1e-12) {
          const double step = std::clamp(err, -turn_budget, turn_budget);
          yaw = wrap(yaw + step);
          turn_budget -= std::abs(step);
          if (std::abs(err - step) > 1e-12) break;
          // Heading reached: snap to avoid accumulating roundoff.
          yaw = std::atan2(to.y(), to.x());
        }
        const double move = std::min(budget, dist);
        pos += move / dist * to;
        budget -= move;
        if (move == dist) target = (target + 1) % pts.size();
      }
    }
    out.push_back({static_cast<double>(k) * dt, planar(pos, s.start.z(), yaw)});
  }
  return Trajectory(std::move(out));
}

Trajectory from_file(const PathSpec& s, double duration, double dt) {
  const Trajectory src = load_tum(s.file);
  if (src.size() < 2) throw ConfigError("path file " + s.file.string() + " needs at least two poses");
  const double t0 = src.front().timestamp;
  const double span = std::min(duration, src.back().timestamp - t0);
  std::vector<StampedPose> out;
  std::size_t j = 0;
  const std::size_t n = sample_count(span, dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    while (j + 2 < src.size() && src[j + 1].timestamp - t0 < t) ++j;
    const StampedPose& a = src[j];
    const StampedPose& b = src[j + 1];
    const double u = std::clamp((t + t0 - a.timestamp) / (b.timestamp - a.timestamp), 0.0, 1.0);
    const Eigen::Vector3d p = (1.0 - u) * a.pose.translation() + u * b.pose.translation();
    out.push_back({t, Pose(a.pose.rotation().slerp(u, b.pose.rotation()), p)});
  }
  return Trajectory(std::move(out));
}

}  // namespace

std::string_view to_string(PathKind kind) {
  switch (kind) {
    case PathKind::circle:
      return "circle";
    case PathKind::lawnmower:
      return "lawnmower";
    case PathKind::corridor:
      return "corridor";
    case PathKind::polyline:
      return "polyline";
    case PathKind::file:
      return "file";
  }
  return "unknown";
}

PathKind path_kind_from_string(std::string_view name) {
  for (PathKind k : {PathKind::circle, PathKind::lawnmower, PathKind::corridor, PathKind::polyline,
                     PathKind::file}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown path kind '" + std::string(name) + "'");
}

void PathSpec::validate() const {
  if (!(speed > 0.0)) throw ConfigError("path speed must be positive");
  if (!(turn_rate > 0.0)) throw ConfigError("path turn_rate must be positive");
  switch (kind) {
    case PathKind::circle:
      if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");
      break;
    case PathKind::corridor:
      if (!(length > 0.0)) throw ConfigError("corridor length must be positive");
      break;
    case PathKind::lawnmower:
      if (!(length > 0.0) || !(spacing > 0.0) || width < 0.0) {
        throw ConfigError("lawnmower needs positive length and spacing and non-negative width");
      }
      break;
    case PathKind::polyline:
      if (waypoints.empty()) throw ConfigError("polyline needs at least one waypoint");
      break;
    case PathKind::file:
      if (file.empty()) throw ConfigError("file path needs a trajectory file");
      break;
  }
}

Trajectory generate_path(const PathSpec& spec, double duration, double dt) {
  spec.validate();
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (duration < 0.0) throw ParameterError("duration must be non-negative");
  switch (spec.kind) {
    case PathKind::circle:
      return circle(spec, duration, dt);
    case PathKind::file:
      return from_file(spec, duration, dt);
    default:
      return follow(spec, duration, dt);
  }
}

}  // namespace graphwave
