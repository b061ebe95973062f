#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "graphwave/pose_graph.hpp"
#include "graphwave/trajectory.hpp"

namespace graphwave {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// SE(3) quaternion graph text format:
///
///   VERTEX_SE3:QUAT id x y z qx qy qz qw
///   EDGE_SE3:QUAT from to x y z qx qy qz qw  I11 I12 .. I16 I22 .. I66
///
/// Lines starting with '#' are comments. Node metadata (robot, submap, time)
/// and edge kinds are carried in '#@' comment lines so other readers still
/// accept the file. Without metadata, edges between consecutive ids are
/// read as odometry and all others as loop closures.
PoseGraph read_g2o(std::istream& in);
void write_g2o(const PoseGraph& graph, std::ostream& out);

PoseGraph load_g2o(const std::filesystem::path& path);
void save_g2o(const PoseGraph& graph, const std::filesystem::path& path);

/// TUM trajectory text: `timestamp x y z qx qy qz qw` per line, '#' comments.
Trajectory read_tum(std::istream& in);
void write_tum(const Trajectory& trajectory, std::ostream& out);

Trajectory load_tum(const std::filesystem::path& path);
void save_tum(const Trajectory& trajectory, const std::filesystem::path& path);

}  // namespace graphwave
