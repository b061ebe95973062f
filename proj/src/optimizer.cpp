#include "graphwave/optimizer.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "graphwave/errors.hpp"

namespace graphwave {
namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Component root (smallest variable index) per variable, indices in id order.
std::vector<std::size_t> component_roots(const OptimizationProblem& problem,
                                         const std::unordered_map<NodeId, std::size_t>& index) {
  UnionFind uf(problem.variables.size());
  for (const PoseEdge& f : problem.factors) uf.unite(index.at(f.from), index.at(f.to));
  std::vector<std::size_t> roots(problem.variables.size());
  for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = uf.find(i);
  return roots;
}

std::unordered_map<NodeId, std::size_t> variable_index(const OptimizationProblem& problem) {
  std::unordered_map<NodeId, std::size_t> index;
  std::size_t i = 0;
  for (const auto& [id, pose] : problem.variables) index.emplace(id, i++);
  return index;
}

// Robust weight and cost contribution for a squared Mahalanobis norm.
std::pair<double, double> robustify(double chi2, const SolverOptions& options) {
  if (!options.huber) return {1.0, chi2};
  const double e = std::sqrt(chi2);
  const double d = options.huber_delta;
  if (e <= d) return {1.0, chi2};
  return {d / e, 2.0 * d * e - d * d};
}

}  // namespace

void OptimizationProblem::validate() const {
  for (const PoseEdge& f : factors) {
    for (NodeId id : {f.from, f.to}) {
      if (!variables.contains(id)) {
        throw ValidationError("factor references unknown variable " + std::to_string(id));
      }
    }
    if (f.from == f.to) throw ValidationError("factor connects a variable to itself");
  }
  for (NodeId a : anchors) {
    if (!variables.contains(a)) throw ValidationError("anchor " + std::to_string(a) + " is not a variable");
  }
  const auto index = variable_index(*this);
  const auto roots = component_roots(*this, index);
  std::unordered_map<std::size_t, int> anchored;
  for (NodeId a : anchors) ++anchored[roots[index.at(a)]];
  for (std::size_t r : roots) {
    const auto it = anchored.find(r);
    if (it == anchored.end() || it->second != 1) {
      throw ValidationError("every connected component needs exactly one anchor");
    }
  }
}

std::set<NodeId> component_anchors(const OptimizationProblem& problem,
                                   std::span<const NodeId> preferred) {
  const auto index = variable_index(problem);
  for (const PoseEdge& f : problem.factors) {
    if (!index.contains(f.from) || !index.contains(f.to)) {
      throw ValidationError("factor references unknown variable");
    }
  }
  const auto roots = component_roots(problem, index);
  std::map<std::size_t, NodeId> chosen;
  std::vector<NodeId> pref(preferred.begin(), preferred.end());
  std::sort(pref.begin(), pref.end());
  for (NodeId id : pref) {
    const auto it = index.find(id);
    if (it != index.end()) chosen.emplace(roots[it->second], id);
  }
  for (const auto& [id, pose] : problem.variables) chosen.emplace(roots[index.at(id)], id);
  std::set<NodeId> anchors;
  for (const auto& [root, id] : chosen) anchors.insert(id);
  return anchors;
}

Vector6d residual(const PoseEdge& factor, const Pose& from, const Pose& to) {
  return log_map(factor.measurement.inverse() * (from.inverse() * to)).vector();
}

FactorJacobians residual_jacobians(const PoseEdge& factor, const Pose& from, const Pose& to) {
  const Twist r = log_map(factor.measurement.inverse() * (from.inverse() * to));
  const Matrix6d jr_inv = se3_right_jacobian_inverse(r);
  return {-jr_inv * adjoint(to.inverse() * from), jr_inv};
}

double total_cost(const OptimizationProblem& problem, const std::map<NodeId, Pose>& values,
                  const SolverOptions& options) {
  double cost = 0.0;
  for (const PoseEdge& f : problem.factors) {
    const Vector6d r = residual(f, values.at(f.from), values.at(f.to));
    cost += robustify(r.dot(f.information * r), options).second;
  }
  return 0.5 * cost;
}

SolveResult solve(const OptimizationProblem& problem, const SolverOptions& options) {
  problem.validate();

  // Column block per free variable, in id order.
  std::unordered_map<NodeId, Eigen::Index> block;
  Eigen::Index free_count = 0;
  for (const auto& [id, pose] : problem.variables) {
    if (!problem.anchors.contains(id)) block.emplace(id, free_count++);
  }
  const Eigen::Index dim = 6 * free_count;

  SolveResult result{problem.variables, {}};
  SolveReport& report = result.report;
  double cost = total_cost(problem, result.variables, options);
  report.initial_cost = cost;
  report.accepted_costs.push_back(cost);

  double lambda = options.lambda_init;
  constexpr double kMaxLambda = 1e12;
  bool pattern_ready = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  while (dim > 0 && cost > 0.0 && report.iterations < options.max_iterations) {
    // Normal equations in fixed factor order.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(problem.factors.size() * 144 + static_cast<std::size_t>(dim));
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(dim);
    for (const PoseEdge& f : problem.factors) {
      const Pose& xi = result.variables.at(f.from);
      const Pose& xj = result.variables.at(f.to);
      const Vector6d r = residual(f, xi, xj);
      const FactorJacobians jac = residual_jacobians(f, xi, xj);
      const double w = robustify(r.dot(f.information * r), options).first;
      const Matrix6d omega = w * f.information;

      const auto bi = block.find(f.from);
      const auto bj = block.find(f.to);
      const std::array<std::pair<Eigen::Index, const Matrix6d*>, 2> parts{
          std::pair{bi == block.end() ? Eigen::Index{-1} : bi->second, &jac.from},
          std::pair{bj == block.end() ? Eigen::Index{-1} : bj->second, &jac.to}};
      for (const auto& [ba, ja] : parts) {
        if (ba < 0) continue;
        gradient.segment<6>(6 * ba) += ja->transpose() * omega * r;
        for (const auto& [bb, jb] : parts) {
          if (bb < 0) continue;
          const Matrix6d h = ja->transpose() * omega * *jb;
          for (int c = 0; c < 6; ++c) {
            for (int rr = 0; rr < 6; ++rr) triplets.emplace_back(6 * ba + rr, 6 * bb + c, h(rr, c));
          }
        }
      }
    }
    Eigen::SparseMatrix<double> hessian(dim, dim);
    hessian.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::VectorXd diag = hessian.diagonal().cwiseMax(1e-9);
    if (!pattern_ready) {
      // The diagonal is always present, so damping never changes the pattern.
      Eigen::SparseMatrix<double> pattern = hessian;
      for (Eigen::Index i = 0; i < dim; ++i) pattern.coeffRef(i, i) += 1.0;
      ldlt.analyzePattern(pattern);
      pattern_ready = true;
    }

    bool accepted = false;
    while (!accepted && lambda <= kMaxLambda) {
      Eigen::SparseMatrix<double> damped = hessian;
      for (Eigen::Index i = 0; i < dim; ++i) damped.coeffRef(i, i) += lambda * diag(i);
      ldlt.factorize(damped);
      if (ldlt.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = ldlt.solve(-gradient);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      std::map<NodeId, Pose> candidate = result.variables;
      for (auto& [id, pose] : candidate) {
        const auto it = block.find(id);
        if (it == block.end()) continue;
        pose = pose * exp_map(Twist::from_vector(step.segment<6>(6 * it->second)));
      }
      double new_cost;
      try {
        new_cost = total_cost(problem, candidate, options);
      } catch (const BranchAmbiguityError&) {
        new_cost = std::numeric_limits<double>::infinity();
      }
      if (new_cost <= cost) {
        accepted = true;
        ++report.iterations;
        const double change = (cost - new_cost) / std::max(cost, 1e-300);
        result.variables = std::move(candidate);
        cost = new_cost;
        report.accepted_costs.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        if (change < options.relative_tolerance) report.converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      if (report.iterations == 0 && ldlt.info() != Eigen::Success) {
        throw SolverError("normal equations remain singular after damping");
      }
      // No descent direction left at this precision.
      report.converged = true;
    }
    if (report.converged) break;
  }
  if (dim == 0 || cost == 0.0) report.converged = true;

  report.final_cost = cost;
  for (const PoseEdge& f : problem.factors) {
    const Vector6d r = residual(f, result.variables.at(f.from), result.variables.at(f.to));
    report.chi2[f.kind] += r.dot(f.information * r);
  }
  return result;
}

BatchResult apply_batch(OptimizationProblem& problem, std::span<const PoseEdge> edges) {
  BatchResult out;
  for (const PoseEdge& e : edges) {
    if (!problem.variables.contains(e.from) || !problem.variables.contains(e.to) || e.from == e.to) {
      out.rejected.push_back(e);
      continue;
    }
    const auto it = std::find_if(problem.factors.begin(), problem.factors.end(), [&](const PoseEdge& f) {
      return f.kind == e.kind && f.from == e.from && f.to == e.to;
    });
    if (it != problem.factors.end()) {
      *it = e;
      ++out.replaced;
    } else {
      problem.factors.push_back(e);
      ++out.added;
    }
  }
  return out;
}

OnboardGraph::OnboardGraph(int robot_id, SolverOptions options, Information odometry_information)
    : robot_id_(robot_id), options_(options), odometry_information_(odometry_information) {
  validate_information(odometry_information_);
}

void OnboardGraph::add_node(const PoseNode& node, const Pose& odometry) {
  if (problem_.variables.contains(node.id)) {
    throw ValidationError("node " + std::to_string(node.id) + " already in onboard graph");
  }
  PoseNode stored = node;
  stored.robot_id = robot_id_;
  if (nodes_.empty()) {
    problem_.anchors.insert(node.id);
  } else {
    const NodeId prev = nodes_.back().id;
    if (node.timestamp < nodes_.back().timestamp) {
      throw ValidationError("onboard nodes must arrive in time order");
    }
    stored.pose = problem_.variables.at(prev) * odometry;
    problem_.factors.push_back({prev, node.id, EdgeKind::odometry, odometry, odometry_information_});
  }
  problem_.variables.emplace(node.id, stored.pose);
  nodes_.push_back(stored);
}

OnboardGraph::Outcome OnboardGraph::incorporate(std::span<const PoseEdge> batch) {
  Outcome outcome{apply_batch(problem_, batch), std::nullopt};
  if (outcome.batch.applied() == 0) return outcome;
  SolveResult solved = solve(problem_, options_);
  ++solve_count_;
  problem_.variables = std::move(solved.variables);
  outcome.report = std::move(solved.report);
  return outcome;
}

PoseGraph OnboardGraph::snapshot() const {
  std::vector<PoseNode> nodes = nodes_;
  for (PoseNode& n : nodes) n.pose = problem_.variables.at(n.id);
  return PoseGraph(std::move(nodes), problem_.factors);
}

}  // namespace graphwave
