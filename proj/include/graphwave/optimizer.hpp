#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "graphwave/pose_graph.hpp"

namespace graphwave {

/// Pose variables, relative-pose factors, and the gauge anchors held fixed
/// during optimization (exactly one per connected component).
struct OptimizationProblem {
  std::map<NodeId, Pose> variables;
  std::vector<PoseEdge> factors;
  std::set<NodeId> anchors;

  /// Throws ValidationError on dangling factors or components without
  /// exactly one anchor.
  void validate() const;
};

/// One anchor per connected component: the smallest id among `preferred`
/// that lies in the component, else the component's smallest id.
std::set<NodeId> component_anchors(const OptimizationProblem& problem,
                                   std::span<const NodeId> preferred = {});

struct SolverOptions {
  int max_iterations = 100;
  double lambda_init = 1e-4;
  double relative_tolerance = 1e-9;
  bool huber = false;
  double huber_delta = 1.0;
};

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  /// Sum of r^T Omega r per factor kind at the solution.
  std::map<EdgeKind, double> chi2;
  /// Cost after every accepted step, starting with the initial cost.
  std::vector<double> accepted_costs;
};

struct SolveResult {
  std::map<NodeId, Pose> variables;
  SolveReport report;
};

/// log(Z^-1 X_from^-1 X_to): zero when the relative pose matches the measurement.
Vector6d residual(const PoseEdge& factor, const Pose& from, const Pose& to);

/// Derivatives of the residual under right perturbations X <- X exp(delta).
struct FactorJacobians {
  Matrix6d from;
  Matrix6d to;
};
FactorJacobians residual_jacobians(const PoseEdge& factor, const Pose& from, const Pose& to);

/// Half the (optionally Huber-robustified) sum of squared Mahalanobis residuals.
double total_cost(const OptimizationProblem& problem, const std::map<NodeId, Pose>& values,
                  const SolverOptions& options = {});

/// Batch Levenberg-Marquardt over all non-anchor variables.
/// Throws SolverError if the damped normal equations stay singular.
SolveResult solve(const OptimizationProblem& problem, const SolverOptions& options = {});

struct BatchResult {
  std::size_t added = 0;
  std::size_t replaced = 0;
  std::vector<PoseEdge> rejected;

  std::size_t applied() const { return added + replaced; }
};

/// Appends each edge, or replaces the existing factor of the same kind on the
/// same ordered pair. Edges with unknown endpoints are rejected and skipped.
BatchResult apply_batch(OptimizationProblem& problem, std::span<const PoseEdge> edges);

/// The robot-side pose graph: an odometry chain anchored at its first node
/// plus correction factors, re-solved once per incorporated batch.
class OnboardGraph {
 public:
  explicit OnboardGraph(int robot_id, SolverOptions options = {},
                        Information odometry_information = default_odometry_information());

  /// Appends a node. Its initial estimate is the previous estimate composed
  /// with `odometry`; the first node becomes the anchor at `first_pose`.
  void add_node(const PoseNode& node, const Pose& odometry);

  /// Applies a batch and triggers one solve if anything changed.
  struct Outcome {
    BatchResult batch;
    std::optional<SolveReport> report;
  };
  Outcome incorporate(std::span<const PoseEdge> batch);

  /// Current estimates as a pose graph (nodes carry the optimized poses).
  PoseGraph snapshot() const;

  const OptimizationProblem& problem() const { return problem_; }
  const std::vector<PoseNode>& nodes() const { return nodes_; }
  int robot_id() const { return robot_id_; }
  std::size_t solve_count() const { return solve_count_; }

 private:
  int robot_id_;
  SolverOptions options_;
  Information odometry_information_;
  OptimizationProblem problem_;
  std::vector<PoseNode> nodes_;
  std::size_t solve_count_ = 0;
};

}  // namespace graphwave
