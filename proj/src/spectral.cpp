#include "graphwave/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <queue>

#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"

namespace graphwave {

double pose_distance(const Pose& a, const Pose& b, const PoseMetric& metric) {
  switch (metric.kind) {
    case DistanceKind::se3:
      return se3_distance_any_branch(a, b, metric.weights);
    case DistanceKind::euclidean:
      return (a.translation() - b.translation()).norm();
    case DistanceKind::rotation:
      return rotation_angle_distance(a, b);
  }
  return 0.0;
}

WeightedGraph::WeightedGraph(std::vector<GraphVertex> vertices, Eigen::MatrixXd adjacency)
    : vertices_(std::move(vertices)), adjacency_(std::move(adjacency)) {
  const auto n = static_cast<Eigen::Index>(vertices_.size());
  if (adjacency_.rows() != n || adjacency_.cols() != n) {
    throw DimensionError("adjacency size does not match vertex count");
  }
  if (n == 0) return;
  if (!adjacency_.allFinite()) throw ValidationError("adjacency has non-finite entries");
  if ((adjacency_ - adjacency_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("adjacency is not symmetric");
  }
  if (adjacency_.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw ValidationError("adjacency has a non-zero diagonal");
  }
  if (adjacency_.minCoeff() < 0.0) throw ValidationError("adjacency has negative weights");
}

WeightedGraph build_graph(std::span<const PoseNode> nodes, double radius, double sigma,
                          const PoseMetric& metric) {
  if (!(radius > 0.0)) throw ParameterError("radius must be positive");
  if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
  if (nodes.size() < 2) throw DegenerateGraphError("graph needs at least two nodes");

  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const PoseNode& a = nodes[i];
      const PoseNode& b = nodes[j];
      const bool chained = j == i + 1 && a.robot_id == b.robot_id;
      const bool near = (a.pose.translation() - b.pose.translation()).norm() <= radius;
      if (!chained && !near) continue;
      const double w = sq_exp_weight(pose_distance(a.pose, b.pose, metric), sigma);
      adjacency(i, j) = adjacency(j, i) = w;
    }
  }

  std::vector<GraphVertex> vertices;
  vertices.reserve(nodes.size());
  for (const PoseNode& p : nodes) vertices.push_back({p.id, p.robot_id, p.timestamp, p.pose});
  return {std::move(vertices), std::move(adjacency)};
}

Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency) {
  Eigen::MatrixXd l = -adjacency;
  l.diagonal() = adjacency.rowwise().sum();
  return l;
}

std::vector<int> connected_components(const Eigen::MatrixXd& adjacency) {
  const auto n = adjacency.rows();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::queue<Eigen::Index> q;
    q.push(s);
    label[s] = next;
    while (!q.empty()) {
      const Eigen::Index u = q.front();
      q.pop();
      for (Eigen::Index v = 0; v < n; ++v) {
        if (label[v] < 0 && adjacency(u, v) > 0.0) {
          label[v] = next;
          q.push(v);
        }
      }
    }
    ++next;
  }
  return label;
}

int component_count(const Eigen::MatrixXd& adjacency) {
  int count = 0;
  for (int l : connected_components(adjacency)) count = std::max(count, l + 1);
  return count;
}

LaplacianDecomposition decompose(const Eigen::MatrixXd& laplacian) {
  if (laplacian.rows() != laplacian.cols()) throw DimensionError("Laplacian must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition did not converge");
  }
  LaplacianDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  if (out.eigenvalues.size() == 0) return out;
  const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    double& lambda = out.eigenvalues(i);
    if (lambda < 0.0) {
      if (lambda < -1e-8 * scale) throw NumericalError("Laplacian is not positive semidefinite");
      lambda = 0.0;
    }
  }
  return out;
}

Eigen::VectorXd gft(const LaplacianDecomposition& decomp, const Eigen::VectorXd& signal) {
  if (static_cast<std::size_t>(signal.size()) != decomp.size()) {
    throw DimensionError("signal length does not match graph size");
  }
  return decomp.eigenvectors.transpose() * signal;
}

Eigen::VectorXd igft(const LaplacianDecomposition& decomp, const Eigen::VectorXd& spectrum) {
  if (static_cast<std::size_t>(spectrum.size()) != decomp.size()) {
    throw DimensionError("spectrum length does not match graph size");
  }
  return decomp.eigenvectors * spectrum;
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix,
               const std::vector<std::string>& header) {
  if (header.size() != static_cast<std::size_t>(matrix.cols())) {
    throw DimensionError("CSV header does not match column count");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      out << (c ? "," : "") << format_double(matrix(r, c));
    }
    out << '\n';
  }
}

}  // namespace graphwave
