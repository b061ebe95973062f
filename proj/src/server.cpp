#include "graphwave/server.hpp"

#include <algorithm>
#include <cmath>

#include "graphwave/errors.hpp"
#include "graphwave/kron.hpp"
#include "graphwave/trajectory.hpp"

namespace graphwave {

void Submap::validate() const {
  if (nodes.empty()) throw ValidationError("submap " + std::to_string(submap_id) + " is empty");
  if (odometry.size() != nodes.size()) {
    throw ValidationError("submap " + std::to_string(submap_id) + " needs one odometry pose per node");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].robot_id != robot_id || nodes[i].submap_id != submap_id) {
      throw ValidationError("submap " + std::to_string(submap_id) + " holds a foreign node");
    }
    if (i > 0 && !(nodes[i].timestamp > nodes[i - 1].timestamp)) {
      throw ValidationError("submap " + std::to_string(submap_id) + " timestamps must increase");
    }
  }
}

void ServerConfig::validate() const {
  if (loop_radius < 0.0) throw ConfigError("server.loop_radius must be non-negative");
  if (loop_dwell < 0.0) throw ConfigError("server.loop_dwell must be non-negative");
  if ((loop_noise.array() < 0.0).any()) throw ConfigError("server.loop_noise must be non-negative");
  if (keyframe_translation <= 0.0 && keyframe_rotation <= 0.0) {
    throw ConfigError("server.keyframe_translation or server.keyframe_rotation must be positive");
  }
  if (graph_radius <= 0.0) throw ConfigError("server.graph_radius must be positive");
  if (sigma <= 0.0) throw ConfigError("server.sigma must be positive");
  if (reduction_fraction < 0.0 || reduction_fraction >= 1.0) {
    throw ConfigError("server.reduction_fraction must lie in [0, 1)");
  }
  if (reduction_fraction == 0.0 && reduction_threshold < 2) {
    throw ConfigError("server.reduction_threshold must be at least 2");
  }
  validate_information(loop_information);
  validate_information(odometry_information);
}

ServerState::ServerState(ServerConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
}

bool ServerState::has_submap(int robot_id, int submap_id) const {
  return submaps_.contains({robot_id, submap_id});
}

void ingest_submap(ServerState& state, const Submap& submap) {
  submap.validate();
  if (state.has_submap(submap.robot_id, submap.submap_id)) {
    throw ValidationError("robot " + std::to_string(submap.robot_id) + " submap " +
                          std::to_string(submap.submap_id) + " already ingested");
  }
  for (const PoseNode& n : submap.nodes) {
    if (state.nodes_.contains(n.id)) throw ValidationError("node " + std::to_string(n.id) + " already ingested");
  }
  const auto last = state.last_node_.find(submap.robot_id);
  if (last != state.last_node_.end() &&
      !(submap.entry_time() > state.nodes_.at(last->second).timestamp)) {
    throw ValidationError("robot " + std::to_string(submap.robot_id) + " submap " +
                          std::to_string(submap.submap_id) + " precedes already ingested data");
  }

  const Information& info = state.config_.odometry_information;
  std::optional<NodeId> prev;
  if (last != state.last_node_.end()) prev = last->second;
  for (std::size_t i = 0; i < submap.nodes.size(); ++i) {
    const PoseNode& n = submap.nodes[i];
    Pose initial = n.pose;
    if (prev) {
      initial = state.problem_.variables.at(*prev) * submap.odometry[i];
      state.problem_.factors.push_back({*prev, n.id, EdgeKind::odometry, submap.odometry[i], info});
    } else {
      state.first_nodes_.push_back(n.id);
    }
    state.problem_.variables[n.id] = initial;
    PoseNode stored = n;
    stored.pose = initial;
    state.nodes_[n.id] = stored;
    prev = n.id;
  }
  state.last_node_[submap.robot_id] = *prev;
  auto& ids = state.submaps_[{submap.robot_id, submap.submap_id}];
  for (const PoseNode& n : submap.nodes) ids.push_back(n.id);
  state.problem_.anchors = component_anchors(state.problem_, state.first_nodes_);
}

std::vector<PoseEdge> detect_loop_closures(ServerState& state, const GroundTruth& ground_truth,
                                           double radius, const Vector6d& noise_std) {
  const ServerConfig& cfg = state.config();
  std::vector<const PoseNode*> nodes;
  nodes.reserve(state.nodes().size());
  for (const auto& [id, n] : state.nodes()) {
    if (!ground_truth.contains(id)) throw ValidationError("no ground truth for node " + std::to_string(id));
    nodes.push_back(&n);
  }

  using SubmapKey = std::pair<int, int>;
  std::map<std::pair<SubmapKey, SubmapKey>, std::vector<std::pair<NodeId, NodeId>>> candidates;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const PoseNode& a = *nodes[i];
    const Eigen::Vector3d pa = ground_truth.at(a.id).translation();
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const PoseNode& b = *nodes[j];
      if (a.robot_id == b.robot_id && std::abs(a.timestamp - b.timestamp) <= cfg.loop_dwell) continue;
      if ((ground_truth.at(b.id).translation() - pa).squaredNorm() > r2) continue;
      if (state.closed_pairs().contains({a.id, b.id})) continue;
      SubmapKey ka{a.robot_id, a.submap_id}, kb{b.robot_id, b.submap_id};
      if (kb < ka) std::swap(ka, kb);
      candidates[{ka, kb}].emplace_back(a.id, b.id);
    }
  }

  std::vector<PoseEdge> edges;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& [key, pairs] : candidates) {
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    const auto [from, to] = pairs[pick(state.rng())];
    Vector6d noise;
    for (int k = 0; k < 6; ++k) noise(k) = noise_std(k) * normal(state.rng());
    const Pose truth = ground_truth.at(from).inverse() * ground_truth.at(to);
    edges.push_back({from, to, EdgeKind::loop_closure, truth * exp_map(Twist::from_vector(noise)),
                     cfg.loop_information});
  }
  return edges;
}

ServerCycleResult server_cycle(ServerState& state, std::span<const Submap> new_submaps,
                               const GroundTruth& ground_truth) {
  const ServerConfig& cfg = state.config_;
  ServerCycleResult result;
  for (const Submap& s : new_submaps) {
    ingest_submap(state, s);
    ++result.ingested;
  }
  if (state.nodes_.empty()) {
    result.note = "no data";
    result.message.version = ++state.version_;
    state.last_message_ = result.message;
    return result;
  }

  const auto closures = detect_loop_closures(state, ground_truth, cfg.loop_radius, cfg.loop_noise);
  for (const PoseEdge& e : closures) {
    state.problem_.factors.push_back(e);
    state.closed_.insert({e.from, e.to});
  }
  result.closures = closures.size();
  state.problem_.anchors = component_anchors(state.problem_, state.first_nodes_);

  try {
    SolveResult solved = solve(state.problem_, cfg.solver);
    state.problem_.variables = std::move(solved.variables);
    result.solve = std::move(solved.report);
  } catch (const SolverError& e) {
    result.solver_failed = true;
    result.note = std::string("solver failed: ") + e.what();
    if (state.last_message_) {
      result.message = *state.last_message_;
      result.broadcast_nodes = result.message.nodes.size();
      return result;
    }
  }
  for (auto& [id, node] : state.nodes_) node.pose = state.problem_.variables.at(id);

  std::map<int, std::vector<PoseNode>> per_robot;
  for (const auto& [id, node] : state.nodes_) per_robot[node.robot_id].push_back(node);
  std::vector<PoseNode> reps;
  for (auto& [robot, list] : per_robot) {
    std::sort(list.begin(), list.end(), [](const PoseNode& a, const PoseNode& b) {
      return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.id < b.id);
    });
    std::vector<StampedPose> samples;
    samples.reserve(list.size());
    for (const PoseNode& n : list) samples.push_back({n.timestamp, n.pose});
    for (std::size_t i : keyframe_indices(Trajectory(std::move(samples)), cfg.keyframe_translation,
                                          cfg.keyframe_rotation)) {
      reps.push_back(list[i]);
    }
  }
  result.representative_nodes = reps.size();

  std::vector<PoseNode> live;
  for (const PoseNode& n : reps) {
    if (!state.pruned_.contains(n.id)) live.push_back(n);
  }
  std::vector<PoseNode> broadcast = live;
  if (live.size() >= 2) {
    WeightedGraph graph = build_graph(live, cfg.graph_radius, cfg.sigma, cfg.metric);
    if (reps.size() > cfg.reduction_threshold) {
      const std::size_t target = cfg.reduction_fraction > 0.0
                                     ? reduced_node_count(reps.size(), cfg.reduction_fraction)
                                     : cfg.reduction_threshold;
      const std::size_t keep = std::max<std::size_t>(target, 2);
      if (keep < live.size()) {
        try {
          graph = kron_reduce(graph, keep);
          std::set<NodeId> kept;
          for (const GraphVertex& v : graph.vertices()) kept.insert(v.node_id);
          broadcast.clear();
          for (const PoseNode& n : live) {
            if (kept.contains(n.id)) {
              broadcast.push_back(n);
            } else {
              state.pruned_.insert(n.id);
            }
          }
          result.reduced = true;
        } catch (const ReductionError& e) {
          result.note = std::string("reduction skipped: ") + e.what();
        }
      }
    }
    result.broadcast_components = component_count(graph.adjacency());
  } else {
    result.broadcast_components = static_cast<int>(live.size());
  }

  result.broadcast_nodes = broadcast.size();
  result.message.version = ++state.version_;
  result.message.nodes = std::move(broadcast);
  state.last_message_ = result.message;
  return result;
}

}  // namespace graphwave
