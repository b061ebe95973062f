#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphwave/se3.hpp"

namespace graphwave {

using NodeId = std::int64_t;
using Information = Matrix6d;

enum class EdgeKind { odometry, loop_closure, correction };

std::string_view to_string(EdgeKind kind);
std::optional<EdgeKind> edge_kind_from_string(std::string_view name);

/// Default odometry information: translation sigma 0.1 m, rotation sigma 0.05 rad.
Information default_odometry_information();

struct PoseNode {
  NodeId id = 0;
  int robot_id = 0;
  int submap_id = 0;
  Pose pose;
  double timestamp = 0.0;
};

/// Relative-pose measurement from `from` to `to`, expressed in the `from` frame.
struct PoseEdge {
  NodeId from = 0;
  NodeId to = 0;
  EdgeKind kind = EdgeKind::odometry;
  Pose measurement;
  Information information = default_odometry_information();
};

/// Throws ValidationError unless `info` is symmetric and positive definite.
void validate_information(const Information& info);

/// Immutable pose graph. Construction validates every invariant:
/// unique node ids, existing edge endpoints, SPD information matrices, and
/// odometry edges forming one simple time-ordered chain per robot.
class PoseGraph {
 public:
  PoseGraph() = default;
  PoseGraph(std::vector<PoseNode> nodes, std::vector<PoseEdge> edges);

  const std::vector<PoseNode>& nodes() const { return nodes_; }
  const std::vector<PoseEdge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  bool contains(NodeId id) const { return index_.contains(id); }
  /// Throws ValidationError when the id is unknown.
  const PoseNode& node(NodeId id) const;

  /// Nodes of one robot, sorted by timestamp (ties by id).
  std::vector<PoseNode> robot_nodes(int robot_id) const;

 private:
  std::vector<PoseNode> nodes_;
  std::vector<PoseEdge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
};

}  // namespace graphwave
