#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphwave/message.hpp"
#include "graphwave/meyer.hpp"
#include "graphwave/pose_graph.hpp"
#include "graphwave/spectral.hpp"
#include "graphwave/trajectory.hpp"

namespace graphwave {

struct SyncPair {
  NodeId server_id = 0;
  NodeId onboard_id = 0;
};

/// One-to-one timestamp association between server and onboard nodes,
/// ordered by server timestamp.
struct SyncMap {
  std::vector<SyncPair> pairs;
  double tolerance = kDefaultAssociationTolerance;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// Greedy nearest-timestamp matching; pairs further apart than `tolerance`
/// are dropped. Both inputs must be sorted by timestamp.
SyncMap synchronize(std::span<const PoseNode> server_nodes, std::span<const PoseNode> onboard_nodes,
                    double tolerance = kDefaultAssociationTolerance);

/// Per-node distance from a map origin. Zero at the origin.
struct GraphSignal {
  Eigen::VectorXd values;
  /// Node closest to the origin (first one on ties).
  NodeId origin_node_id = 0;
};

GraphSignal build_signal(std::span<const PoseNode> nodes, const Pose& origin,
                         const PoseMetric& metric = {});

/// |W_server - W_onboard| per synchronized node (row) and band (column).
struct ScaleDistances {
  Eigen::MatrixXd values;
};

ScaleDistances scale_distances(const WaveletCoefficients& server, const WaveletCoefficients& onboard,
                               const SyncMap& sync);

enum class ConstraintKind { adjacent, n_hop, submap };

std::string_view to_string(ConstraintKind kind);

/// Maps coefficient bands to constraint kinds. The finest `adjacent_bands`
/// wavelet bands yield adjacent constraints, the next `n_hop_bands` n-hop
/// constraints, and the remaining wavelet bands plus the scaling band
/// submap constraints.
struct BandPartition {
  int adjacent_bands = 3;
  int n_hop_bands = 3;

  ConstraintKind classify(std::size_t band) const;
  /// Split of `num_scales` wavelet bands into thirds, finest third first.
  static BandPartition thirds(int num_scales);
};

/// Synchronized node as seen by constraint selection, in sync order.
struct SyncedNode {
  NodeId onboard_id = 0;
  NodeId server_id = 0;
  int submap_id = 0;
  Pose server_pose;
};

struct ConstraintCandidate {
  ConstraintKind kind = ConstraintKind::adjacent;
  NodeId from_id = 0;
  NodeId to_id = 0;
  /// server_pose(from)^-1 * server_pose(to).
  Pose measurement;
  double score = 0.0;
  std::size_t scale_band = 0;
  /// Onboard node whose discrepancy triggered the constraint.
  NodeId node_id = 0;
};

struct SelectionConfig {
  std::size_t top_k = 15;
  BandPartition partition;
  int n_hop = 3;
  /// Entries at or below this score are treated as agreement.
  double min_score = 1e-9;
  /// Rank nodes by the sum over bands instead of their best band.
  bool accumulate_scales = false;
  /// Skip candidates the ledger would drop, so every slot carries news.
  bool fill_from_ledger = true;
};

/// Ranks nodes by their largest scale distance (ties: lower onboard id, then
/// finer band), and turns the best `top_k` into distinct constraints.
/// `admit`, when set, filters candidates before they count towards top_k.
std::vector<ConstraintCandidate> select_constraints(
    const ScaleDistances& distances, std::span<const SyncedNode> nodes, const SelectionConfig& config,
    const std::function<bool(const ConstraintCandidate&)>& admit = {});

struct LedgerEntry {
  ConstraintCandidate candidate;
  double applied_at = 0.0;
};

/// History of applied corrections, at most one per ordered node pair.
class ConstraintLedger {
 public:
  using Key = std::pair<NodeId, NodeId>;

  const LedgerEntry* find(NodeId from, NodeId to) const;
  void record(const ConstraintCandidate& candidate, double now);
  std::size_t size() const { return entries_.size(); }
  const std::map<Key, LedgerEntry>& entries() const { return entries_; }

 private:
  std::map<Key, LedgerEntry> entries_;
};

struct LedgerDecision {
  std::vector<ConstraintCandidate> to_add;
  std::vector<ConstraintCandidate> to_update;

  std::size_t size() const { return to_add.size() + to_update.size(); }
};

/// Classifies candidates against the ledger: unseen pairs are added, pairs
/// whose measurement moved by more than the tolerances are updated, the rest
/// dropped. The ledger records every emitted candidate.
LedgerDecision ledger_apply(ConstraintLedger& ledger, std::span<const ConstraintCandidate> candidates,
                            double translation_tolerance, double rotation_tolerance, double now);

/// Re-emits ledger entries whose endpoints are synchronized but whose
/// server-side relative pose has since moved beyond the tolerances.
std::vector<ConstraintCandidate> ledger_refresh(ConstraintLedger& ledger,
                                                std::span<const SyncedNode> nodes,
                                                double translation_tolerance,
                                                double rotation_tolerance, double now);

struct ConsistencyConfig {
  double sync_tolerance = kDefaultAssociationTolerance;
  double radius = 7.0;
  /// Chosen so an edge at the search radius weighs 0.1.
  double sigma = sigma_for_weight(7.0, 0.1);
  PoseMetric metric;
  int num_scales = 9;
  SelectionConfig selection;
  double ledger_translation_tolerance = 0.1;
  double ledger_rotation_tolerance = 0.05;
  bool refresh_ledger = true;
  /// Correction information as a multiple of the odometry information.
  double correction_information_scale = 0.5;
  Information odometry_information = default_odometry_information();
  std::size_t min_synced_nodes = 3;
};

/// Full spectral comparison of one robot's server and onboard estimates.
struct Comparison {
  SyncMap sync;
  std::vector<SyncedNode> nodes;
  GraphSignal server_signal;
  GraphSignal onboard_signal;
  WaveletCoefficients server_coefficients;
  WaveletCoefficients onboard_coefficients;
  ScaleDistances distances;
  double lambda_max = 0.0;
};

/// Synchronizes, builds the graph from the server poses, and compares both
/// signals in the server graph's wavelet basis. Throws DegenerateGraphError
/// with fewer than two synchronized nodes.
Comparison compare(std::span<const PoseNode> server_nodes, std::span<const PoseNode> onboard_nodes,
                   const ConsistencyConfig& config);

struct CycleResult {
  bool processed = false;
  std::string skip_reason;
  std::int64_t version = 0;
  std::size_t synced = 0;
  std::vector<ConstraintCandidate> added;
  std::vector<ConstraintCandidate> updated;
  /// Correction factors for the onboard optimizer, adds then updates.
  std::vector<PoseEdge> batch;
};

/// Robot-side engine. Owns the ledger; one cycle at a time.
class ConsistencyEngine {
 public:
  ConsistencyEngine(int robot_id, ConsistencyConfig config);

  CycleResult run_comparison_cycle(const GlobalGraphMessage& message, const PoseGraph& onboard,
                                   double now);

  const ConstraintLedger& ledger() const { return ledger_; }
  std::int64_t last_version() const { return last_version_; }
  const ConsistencyConfig& config() const { return config_; }

 private:
  int robot_id_;
  ConsistencyConfig config_;
  ConstraintLedger ledger_;
  std::int64_t last_version_ = -1;
};

}  // namespace graphwave
