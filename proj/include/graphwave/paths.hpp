#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string_view>
#include <vector>

#include "graphwave/trajectory.hpp"

namespace graphwave {

enum class PathKind { circle, lawnmower, corridor, polyline, file };

std::string_view to_string(PathKind kind);
/// Throws ConfigError on an unknown name.
PathKind path_kind_from_string(std::string_view name);

/// Planar ground-truth path. Lengths in meters, angles in radians.
struct PathSpec {
  PathKind kind = PathKind::circle;
  double speed = 0.5;
  /// Maximum turn rate when turning in place at waypoints.
  double turn_rate = 0.5;
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  double start_yaw = 0.0;
  double radius = 15.0;
  double length = 40.0;
  double width = 20.0;
  double spacing = 5.0;
  /// Polyline vertices after the start, traversed cyclically (x, y).
  std::vector<Eigen::Vector2d> waypoints;
  std::filesystem::path file;

  void validate() const;
};

/// Samples the path every `dt` seconds over [0, duration]. Circles turn
/// counter-clockwise at constant rate; waypoint paths drive straight and
/// turn in place. File paths are interpolated onto the grid and cut to the
/// file's span.
Trajectory generate_path(const PathSpec& spec, double duration, double dt);

}  // namespace graphwave
