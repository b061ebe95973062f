#include "graphwave/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "graphwave/errors.hpp"

namespace graphwave {
namespace {

Trajectory to_trajectory(std::span<const PoseNode> nodes) {
  std::vector<StampedPose> poses;
  poses.reserve(nodes.size());
  for (const PoseNode& n : nodes) poses.push_back({n.timestamp, n.pose});
  return Trajectory(std::move(poses));
}

}  // namespace

SyncMap synchronize(std::span<const PoseNode> server_nodes, std::span<const PoseNode> onboard_nodes,
                    double tolerance) {
  if (tolerance < 0.0) throw ParameterError("sync tolerance must be non-negative");
  SyncMap sync;
  sync.tolerance = tolerance;
  if (server_nodes.empty() || onboard_nodes.empty()) return sync;
  const auto pairs = associate(to_trajectory(server_nodes), to_trajectory(onboard_nodes), tolerance);
  sync.pairs.reserve(pairs.size());
  for (const auto& [s, o] : pairs) sync.pairs.push_back({server_nodes[s].id, onboard_nodes[o].id});
  return sync;
}

GraphSignal build_signal(std::span<const PoseNode> nodes, const Pose& origin, const PoseMetric& metric) {
  if (nodes.empty()) throw ParameterError("signal needs at least one node");
  GraphSignal signal;
  signal.values.resize(static_cast<Eigen::Index>(nodes.size()));
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = pose_distance(origin, nodes[i].pose, metric);
    signal.values(static_cast<Eigen::Index>(i)) = d;
    if (d < closest) {
      closest = d;
      signal.origin_node_id = nodes[i].id;
    }
  }
  return signal;
}

ScaleDistances scale_distances(const WaveletCoefficients& server, const WaveletCoefficients& onboard,
                               const SyncMap& sync) {
  if (server.bands() != onboard.bands()) {
    throw DimensionError("band count mismatch: " + std::to_string(server.bands()) + " vs " +
                         std::to_string(onboard.bands()));
  }
  if (server.nodes() != onboard.nodes() || server.nodes() != static_cast<Eigen::Index>(sync.size())) {
    throw DimensionError("coefficient rows must match the synchronized node count");
  }
  return {(server.values - onboard.values).cwiseAbs()};
}

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::adjacent:
      return "adjacent";
    case ConstraintKind::n_hop:
      return "n_hop";
    case ConstraintKind::submap:
      return "submap";
  }
  return "unknown";
}

ConstraintKind BandPartition::classify(std::size_t band) const {
  if (band == 0) return ConstraintKind::submap;
  const auto b = static_cast<int>(band);
  if (b <= adjacent_bands) return ConstraintKind::adjacent;
  if (b <= adjacent_bands + n_hop_bands) return ConstraintKind::n_hop;
  return ConstraintKind::submap;
}

BandPartition BandPartition::thirds(int num_scales) {
  if (num_scales < 1) throw ParameterError("num_scales must be positive");
  const int adjacent = (num_scales + 2) / 3;
  return {adjacent, (num_scales - adjacent + 1) / 2};
}

namespace {

struct Ranked {
  std::size_t index;
  std::size_t band;
  double score;
};

// Representative (first synced node) of each submap, in submap id order.
std::map<int, std::size_t> submap_representatives(std::span<const SyncedNode> nodes) {
  std::map<int, std::size_t> reps;
  for (std::size_t i = 0; i < nodes.size(); ++i) reps.try_emplace(nodes[i].submap_id, i);
  return reps;
}

}  // namespace

std::vector<ConstraintCandidate> select_constraints(
    const ScaleDistances& distances, std::span<const SyncedNode> nodes, const SelectionConfig& config,
    const std::function<bool(const ConstraintCandidate&)>& admit) {
  if (config.top_k < 1) throw ParameterError("top_k must be at least 1");
  if (config.n_hop < 1) throw ParameterError("n_hop must be at least 1");
  const Eigen::MatrixXd& d = distances.values;
  if (d.rows() != static_cast<Eigen::Index>(nodes.size())) {
    throw DimensionError("distance rows must match the synchronized node count");
  }
  if (nodes.size() < 2) return {};

  // Best band per node; ties go to the finer band, with the scaling band coarsest.
  const auto finer = [](std::size_t a, std::size_t b) {
    if (a == 0) return false;
    if (b == 0) return true;
    return a < b;
  };
  std::vector<Ranked> ranked;
  for (Eigen::Index n = 0; n < d.rows(); ++n) {
    std::size_t best = 0;
    for (Eigen::Index b = 1; b < d.cols(); ++b) {
      const auto bb = static_cast<std::size_t>(b);
      if (d(n, b) > d(n, best) || (d(n, b) == d(n, best) && finer(bb, best))) best = bb;
    }
    const double score = config.accumulate_scales ? d.row(n).sum() : d(n, best);
    if (score > config.min_score) ranked.push_back({static_cast<std::size_t>(n), best, score});
  }
  std::sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (nodes[a.index].onboard_id != nodes[b.index].onboard_id) {
      return nodes[a.index].onboard_id < nodes[b.index].onboard_id;
    }
    return finer(a.band, b.band);
  });

  const auto reps = submap_representatives(nodes);
  const auto last = nodes.size() - 1;
  const auto clamp_index = [&](std::ptrdiff_t i) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(last)));
  };
  const auto hop_pair = [&](std::size_t i, int hops) {
    const auto si = static_cast<std::ptrdiff_t>(i);
    std::size_t a = clamp_index(si - hops);
    std::size_t b = clamp_index(si + hops);
    if (a == b) b = a == 0 ? 1 : a - 1;
    return std::pair{std::min(a, b), std::max(a, b)};
  };

  std::vector<ConstraintCandidate> out;
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (const Ranked& r : ranked) {
    if (out.size() >= config.top_k) break;
    ConstraintKind kind = config.partition.classify(r.band);
    std::pair<std::size_t, std::size_t> ends;
    if (kind == ConstraintKind::submap) {
      const int own = nodes[r.index].submap_id;
      const Eigen::Vector3d at = nodes[reps.at(own)].server_pose.translation();
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [submap, idx] : reps) {
        if (submap == own) continue;
        const double dist = (nodes[idx].server_pose.translation() - at).norm();
        if (dist < best) {
          best = dist;
          nearest = idx;
        }
      }
      if (std::isinf(best)) {
        kind = ConstraintKind::n_hop;
      } else {
        const std::size_t self = reps.at(own);
        ends = {std::min(self, nearest), std::max(self, nearest)};
      }
    }
    if (kind == ConstraintKind::adjacent) ends = hop_pair(r.index, 1);
    if (kind == ConstraintKind::n_hop) ends = hop_pair(r.index, config.n_hop);
    if (used.contains(ends)) continue;

    const SyncedNode& from = nodes[ends.first];
    const SyncedNode& to = nodes[ends.second];
    ConstraintCandidate c;
    c.kind = kind;
    c.from_id = from.onboard_id;
    c.to_id = to.onboard_id;
    c.measurement = from.server_pose.inverse() * to.server_pose;
    c.score = r.score;
    c.scale_band = r.band;
    c.node_id = nodes[r.index].onboard_id;
    if (admit && !admit(c)) continue;
    used.insert(ends);
    out.push_back(c);
  }
  return out;
}

Comparison compare(std::span<const PoseNode> server_nodes, std::span<const PoseNode> onboard_nodes,
                   const ConsistencyConfig& config) {
  Comparison cmp;
  cmp.sync = synchronize(server_nodes, onboard_nodes, config.sync_tolerance);
  if (cmp.sync.size() < 2) {
    throw DegenerateGraphError("only " + std::to_string(cmp.sync.size()) + " synchronized nodes");
  }

  std::map<NodeId, const PoseNode*> server_by_id, onboard_by_id;
  for (const PoseNode& n : server_nodes) server_by_id[n.id] = &n;
  for (const PoseNode& n : onboard_nodes) onboard_by_id[n.id] = &n;

  std::vector<PoseNode> server_synced, onboard_synced;
  for (const SyncPair& p : cmp.sync.pairs) {
    const PoseNode& s = *server_by_id.at(p.server_id);
    const PoseNode& o = *onboard_by_id.at(p.onboard_id);
    server_synced.push_back(s);
    onboard_synced.push_back(o);
    cmp.nodes.push_back({o.id, s.id, s.submap_id, s.pose});
  }

  const WeightedGraph graph = build_graph(server_synced, config.radius, config.sigma, config.metric);
  const LaplacianDecomposition decomp = decompose(laplacian(graph));
  cmp.lambda_max = decomp.lambda_max();
  if (!(cmp.lambda_max > 0.0)) throw DegenerateGraphError("server graph has no weighted edges");
  const FilterBank bank = make_meyer_bank(cmp.lambda_max, config.num_scales);

  cmp.server_signal = build_signal(server_synced, server_synced.front().pose, config.metric);
  cmp.onboard_signal = build_signal(onboard_synced, onboard_synced.front().pose, config.metric);
  cmp.server_coefficients = wavelet_coefficients(decomp, bank, cmp.server_signal.values);
  cmp.onboard_coefficients = wavelet_coefficients(decomp, bank, cmp.onboard_signal.values);
  cmp.distances = scale_distances(cmp.server_coefficients, cmp.onboard_coefficients, cmp.sync);
  return cmp;
}

ConsistencyEngine::ConsistencyEngine(int robot_id, ConsistencyConfig config)
    : robot_id_(robot_id), config_(std::move(config)) {
  if (config_.radius <= 0.0) throw ParameterError("radius must be positive");
  if (config_.sigma <= 0.0) throw ParameterError("sigma must be positive");
  if (config_.num_scales < 1 || config_.num_scales > kMaxWaveletScales) {
    throw ParameterError("num_scales must lie in [1, " + std::to_string(kMaxWaveletScales) + "]");
  }
  if (config_.correction_information_scale <= 0.0) {
    throw ParameterError("correction_information_scale must be positive");
  }
  validate_information(config_.odometry_information);
}

CycleResult ConsistencyEngine::run_comparison_cycle(const GlobalGraphMessage& message,
                                                    const PoseGraph& onboard, double now) {
  CycleResult result;
  result.version = message.version;
  if (message.version <= last_version_) {
    result.skip_reason = "stale message version " + std::to_string(message.version);
    return result;
  }
  last_version_ = message.version;

  const std::vector<PoseNode> server_nodes = message.robot_nodes(robot_id_);
  const std::vector<PoseNode> onboard_nodes = onboard.robot_nodes(robot_id_);

  Comparison cmp;
  try {
    cmp = compare(server_nodes, onboard_nodes, config_);
  } catch (const DegenerateGraphError& e) {
    result.skip_reason = e.what();
    return result;
  } catch (const ParameterError& e) {
    result.skip_reason = e.what();
    return result;
  }
  result.synced = cmp.sync.size();
  if (result.synced < config_.min_synced_nodes) {
    result.skip_reason = "only " + std::to_string(result.synced) + " synchronized nodes";
    return result;
  }
  result.processed = true;

  std::function<bool(const ConstraintCandidate&)> admit;
  if (config_.selection.fill_from_ledger) {
    admit = [this](const ConstraintCandidate& c) {
      const LedgerEntry* e = ledger_.find(c.from_id, c.to_id);
      if (!e) return true;
      const Pose delta = e->candidate.measurement.inverse() * c.measurement;
      return delta.translation().norm() > config_.ledger_translation_tolerance ||
             delta.angle() > config_.ledger_rotation_tolerance;
    };
  }
  const auto candidates = select_constraints(cmp.distances, cmp.nodes, config_.selection, admit);
  LedgerDecision decision =
      ledger_apply(ledger_, candidates, config_.ledger_translation_tolerance,
                   config_.ledger_rotation_tolerance, now);
  if (config_.refresh_ledger) {
    auto refreshed = ledger_refresh(ledger_, cmp.nodes, config_.ledger_translation_tolerance,
                                    config_.ledger_rotation_tolerance, now);
    decision.to_update.insert(decision.to_update.end(), refreshed.begin(), refreshed.end());
  }
  result.added = std::move(decision.to_add);
  result.updated = std::move(decision.to_update);

  const Information info = config_.correction_information_scale * config_.odometry_information;
  for (const auto* list : {&result.added, &result.updated}) {
    for (const ConstraintCandidate& c : *list) {
      result.batch.push_back({c.from_id, c.to_id, EdgeKind::correction, c.measurement, info});
    }
  }
  return result;
}

}  // namespace graphwave
