#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graphwave/pose_graph.hpp"
#include "graphwave/se3.hpp"

namespace graphwave {

/// Which manifold measures the dissimilarity of two poses. The same choice
/// feeds the graph edge weights and the graph signals.
enum class DistanceKind { se3, euclidean, rotation };

struct PoseMetric {
  DistanceKind kind = DistanceKind::se3;
  MetricWeights weights;
};

/// Non-negative dissimilarity under `metric`; zero for identical poses.
double pose_distance(const Pose& a, const Pose& b, const PoseMetric& metric);

struct GraphVertex {
  NodeId node_id = 0;
  int robot_id = 0;
  double timestamp = 0.0;
  Pose pose;
};

/// Undirected weighted graph over pose vertices. The adjacency is symmetric,
/// non-negative, and has a zero diagonal.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::vector<GraphVertex> vertices, Eigen::MatrixXd adjacency);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<GraphVertex>& vertices() const { return vertices_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }

 private:
  std::vector<GraphVertex> vertices_;
  Eigen::MatrixXd adjacency_;
};

/// Radius-search graph. Pairs within `radius` meters (position distance) get
/// weight exp(-d / (2 sigma^2)) with d the metric distance; consecutive list
/// entries of the same robot are always connected.
WeightedGraph build_graph(std::span<const PoseNode> nodes, double radius, double sigma,
                          const PoseMetric& metric = {});

Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency);
inline Eigen::MatrixXd laplacian(const WeightedGraph& graph) { return laplacian(graph.adjacency()); }

/// Connected-component label per vertex, labels in order of first appearance.
std::vector<int> connected_components(const Eigen::MatrixXd& adjacency);
int component_count(const Eigen::MatrixXd& adjacency);

/// L = U diag(eigenvalues) U^T with ascending, non-negative eigenvalues.
struct LaplacianDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
};

/// Dense symmetric eigendecomposition. Throws NumericalError if the solver
/// fails or the matrix is clearly indefinite.
LaplacianDecomposition decompose(const Eigen::MatrixXd& laplacian);

/// Graph Fourier transform U^T x and its inverse.
Eigen::VectorXd gft(const LaplacianDecomposition& decomp, const Eigen::VectorXd& signal);
Eigen::VectorXd igft(const LaplacianDecomposition& decomp, const Eigen::VectorXd& spectrum);

/// Writes a matrix as CSV with the given header (one name per column).
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix,
               const std::vector<std::string>& header);

}  // namespace graphwave
