#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphwave/message.hpp"
#include "graphwave/optimizer.hpp"
#include "graphwave/pose_graph.hpp"
#include "graphwave/spectral.hpp"

namespace graphwave {

/// Contiguous piece of one robot's onboard map. `odometry[i]` is the
/// measured motion from the robot's previous node to `nodes[i]`; for the
/// robot's first submap `odometry[0]` is ignored.
struct Submap {
  int robot_id = 0;
  int submap_id = 0;
  std::vector<PoseNode> nodes;
  std::vector<Pose> odometry;

  double entry_time() const { return nodes.front().timestamp; }
  double exit_time() const { return nodes.back().timestamp; }
  /// Throws ValidationError when empty, misaligned, or not time-ordered.
  void validate() const;
};

struct ServerConfig {
  double loop_radius = 2.0;
  /// Minimum time between same-robot closure endpoints.
  double loop_dwell = 10.0;
  /// Per-component standard deviation of closure noise, (rho, phi).
  Vector6d loop_noise = Vector6d::Zero();
  Information loop_information = default_odometry_information();
  Information odometry_information = default_odometry_information();
  double keyframe_translation = 0.5;
  double keyframe_rotation = 0.2617993877991494;
  double graph_radius = 7.0;
  double sigma = sigma_for_weight(7.0, 0.1);
  PoseMetric metric;
  /// Reduce when the representative graph exceeds this many nodes.
  std::size_t reduction_threshold = 500;
  /// Fraction of nodes removed when reducing; 0 caps the graph at the threshold.
  double reduction_fraction = 0.0;
  SolverOptions solver;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Ground-truth poses by node id (simulation only).
using GroundTruth = std::map<NodeId, Pose>;

struct ServerCycleResult {
  GlobalGraphMessage message;
  std::size_t ingested = 0;
  std::size_t closures = 0;
  std::optional<SolveReport> solve;
  bool solver_failed = false;
  std::size_t representative_nodes = 0;
  std::size_t broadcast_nodes = 0;
  bool reduced = false;
  int broadcast_components = 0;
  std::string note;
};

class ServerState {
 public:
  explicit ServerState(ServerConfig config);

  const ServerConfig& config() const { return config_; }
  const OptimizationProblem& problem() const { return problem_; }
  const std::map<NodeId, PoseNode>& nodes() const { return nodes_; }
  bool has_submap(int robot_id, int submap_id) const;
  std::size_t submap_count() const { return submaps_.size(); }
  std::int64_t version() const { return version_; }
  const std::optional<GlobalGraphMessage>& last_message() const { return last_message_; }
  std::span<const NodeId> robot_first_nodes() const { return first_nodes_; }
  std::mt19937_64& rng() { return rng_; }

  /// Representative nodes removed by an earlier reduction; they stay out.
  const std::set<NodeId>& pruned() const { return pruned_; }

  /// Node pairs already closed by a loop edge.
  const std::set<std::pair<NodeId, NodeId>>& closed_pairs() const { return closed_; }

  friend void ingest_submap(ServerState& state, const Submap& submap);
  friend ServerCycleResult server_cycle(ServerState& state, std::span<const Submap> new_submaps,
                                        const GroundTruth& ground_truth);

 private:
  ServerConfig config_;
  OptimizationProblem problem_;
  std::map<NodeId, PoseNode> nodes_;
  std::map<std::pair<int, int>, std::vector<NodeId>> submaps_;
  std::map<int, NodeId> last_node_;
  std::vector<NodeId> first_nodes_;
  std::set<std::pair<NodeId, NodeId>> closed_;
  std::set<NodeId> pruned_;
  std::int64_t version_ = 0;
  std::optional<GlobalGraphMessage> last_message_;
  std::mt19937_64 rng_;
};

/// Appends the submap chain with odometry factors. The first submap of a
/// robot anchors it at its first node. Throws ValidationError on a
/// duplicate or out-of-order submap; the state is then unchanged.
void ingest_submap(ServerState& state, const Submap& submap);

/// Oracle closures: node pairs within `radius` meters in ground truth, more
/// than the dwell gap apart in time when they belong to the same robot, and
/// not closed before. At most one closure per submap pair, picked with the
/// server's seeded generator; measurements carry sampled noise.
std::vector<PoseEdge> detect_loop_closures(ServerState& state, const GroundTruth& ground_truth,
                                           double radius, const Vector6d& noise_std);

/// ingest -> closures -> solve -> keyframe representatives -> radius graph
/// -> Kron reduction when over the threshold -> message with the next
/// version. Reduction targets floor(N (1 - fraction)) of all N
/// representatives, or the threshold when the fraction is 0; removed nodes
/// never return, so broadcast node sets only grow by new data. A solver
/// failure rebroadcasts the previous message.
ServerCycleResult server_cycle(ServerState& state, std::span<const Submap> new_submaps,
                               const GroundTruth& ground_truth);

}  // namespace graphwave
