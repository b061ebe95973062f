#include "graphwave/pose_graph.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <map>
#include <string>

#include "graphwave/errors.hpp"

namespace graphwave {

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::odometry:
      return "odometry";
    case EdgeKind::loop_closure:
      return "loop_closure";
    case EdgeKind::correction:
      return "correction";
  }
  return "unknown";
}

std::optional<EdgeKind> edge_kind_from_string(std::string_view name) {
  if (name == "odometry") return EdgeKind::odometry;
  if (name == "loop_closure") return EdgeKind::loop_closure;
  if (name == "correction") return EdgeKind::correction;
  return std::nullopt;
}

Information default_odometry_information() {
  Vector6d diag;
  diag << 100.0, 100.0, 100.0, 400.0, 400.0, 400.0;
  return diag.asDiagonal();
}

void validate_information(const Information& info) {
  if (!info.allFinite()) throw ValidationError("information matrix has non-finite entries");
  if ((info - info.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("information matrix is not symmetric");
  }
  Eigen::LLT<Information> llt(info);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("information matrix is not positive definite");
  }
}

PoseGraph::PoseGraph(std::vector<PoseNode> nodes, std::vector<PoseEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));
    }
  }

  // Odometry chain bookkeeping: at most one outgoing and one incoming per node.
  std::unordered_map<NodeId, NodeId> next;
  std::unordered_map<NodeId, NodeId> prev;
  for (const PoseEdge& e : edges_) {
    for (NodeId id : {e.from, e.to}) {
      if (!index_.contains(id)) {
        throw ValidationError("edge references unknown node id " + std::to_string(id));
      }
    }
    if (e.from == e.to) {
      throw ValidationError("self-loop edge on node " + std::to_string(e.from));
    }
    validate_information(e.information);
    if (e.kind != EdgeKind::odometry) continue;

    const PoseNode& a = node(e.from);
    const PoseNode& b = node(e.to);
    if (a.robot_id != b.robot_id) {
      throw ValidationError("odometry edge " + std::to_string(e.from) + "->" +
                            std::to_string(e.to) + " crosses robots");
    }
    if (b.timestamp < a.timestamp) {
      throw ValidationError("odometry edge " + std::to_string(e.from) + "->" +
                            std::to_string(e.to) + " goes backwards in time");
    }
    if (!next.emplace(e.from, e.to).second || !prev.emplace(e.to, e.from).second) {
      throw ValidationError("odometry edges at node " + std::to_string(e.from) +
                            " do not form a simple chain");
    }
  }

  // One chain per robot: exactly one chain head among nodes touched by odometry.
  std::map<int, int> heads;
  for (const auto& [from, to] : next) {
    if (!prev.contains(from)) ++heads[node(from).robot_id];
  }
  for (const auto& [from, to] : next) {
    const int robot = node(from).robot_id;
    if (heads[robot] != 1) {
      throw ValidationError("odometry edges of robot " + std::to_string(robot) +
                            " do not form a single chain");
    }
  }
}

const PoseNode& PoseGraph::node(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown node id " + std::to_string(id));
  return nodes_[it->second];
}

std::vector<PoseNode> PoseGraph::robot_nodes(int robot_id) const {
  std::vector<PoseNode> out;
  for (const PoseNode& n : nodes_) {
    if (n.robot_id == robot_id) out.push_back(n);
  }
  std::stable_sort(out.begin(), out.end(), [](const PoseNode& a, const PoseNode& b) {
    return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.id < b.id);
  });
  return out;
}

}  // namespace graphwave
