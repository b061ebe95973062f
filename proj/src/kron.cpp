#include "graphwave/kron.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphwave/errors.hpp"

namespace graphwave {

std::vector<std::size_t> select_kron_nodes(const WeightedGraph& graph,
                                           const LaplacianDecomposition& decomp,
                                           std::size_t keep_count) {
  const std::size_t n = graph.size();
  if (decomp.size() != n) throw DimensionError("decomposition does not match graph");
  if (keep_count > n) throw ParameterError("cannot keep more vertices than the graph has");

  const auto modes = static_cast<Eigen::Index>(keep_count);
  const Eigen::VectorXd energy =
      decomp.eigenvectors.rightCols(modes).rowwise().squaredNorm();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ea = energy(static_cast<Eigen::Index>(a));
    const double eb = energy(static_cast<Eigen::Index>(b));
    if (ea != eb) return ea > eb;
    return graph.vertices()[a].timestamp < graph.vertices()[b].timestamp;
  });
  order.resize(keep_count);
  std::sort(order.begin(), order.end());
  return order;
}

Eigen::MatrixXd kron_reduce_laplacian(const Eigen::MatrixXd& laplacian,
                                      std::span<const std::size_t> keep) {
  const auto n = laplacian.rows();
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (std::size_t k : keep) {
    if (static_cast<Eigen::Index>(k) >= n) throw ParameterError("kept index out of range");
    if (kept[k]) throw ParameterError("kept indices must be unique");
    kept[k] = true;
  }
  std::vector<Eigen::Index> removed;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!kept[static_cast<std::size_t>(i)]) removed.push_back(i);
  }
  const auto nk = static_cast<Eigen::Index>(keep.size());
  const auto nr = static_cast<Eigen::Index>(removed.size());

  Eigen::MatrixXd lkk(nk, nk), lkr(nk, nr), lrr(nr, nr);
  for (Eigen::Index a = 0; a < nk; ++a) {
    const auto ia = static_cast<Eigen::Index>(keep[a]);
    for (Eigen::Index b = 0; b < nk; ++b) lkk(a, b) = laplacian(ia, static_cast<Eigen::Index>(keep[b]));
    for (Eigen::Index b = 0; b < nr; ++b) lkr(a, b) = laplacian(ia, removed[b]);
  }
  for (Eigen::Index a = 0; a < nr; ++a) {
    for (Eigen::Index b = 0; b < nr; ++b) lrr(a, b) = laplacian(removed[a], removed[b]);
  }
  if (nr == 0) return lkk;

  // L_rr is a grounded Laplacian: positive definite exactly when every
  // removed vertex reaches a kept one.
  Eigen::MatrixXd adjacency = -laplacian;
  adjacency.diagonal().setZero();
  const auto labels = connected_components(adjacency);
  std::vector<bool> anchored(static_cast<std::size_t>(n), false);
  for (std::size_t k : keep) anchored[static_cast<std::size_t>(labels[k])] = true;
  for (Eigen::Index r : removed) {
    if (!anchored[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])]) {
      throw ReductionError("reduction would remove an entire connected component");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lrr);
  if (llt.info() != Eigen::Success) throw ReductionError("eliminated block is singular");
  return lkk - lkr * llt.solve(lkr.transpose());
}

WeightedGraph kron_reduce(const WeightedGraph& graph, std::span<const std::size_t> keep) {
  if (!std::is_sorted(keep.begin(), keep.end())) {
    throw ParameterError("kept indices must be ascending");
  }
  const Eigen::MatrixXd reduced = kron_reduce_laplacian(laplacian(graph), keep);
  const auto nk = reduced.rows();
  Eigen::MatrixXd adjacency(nk, nk);
  for (Eigen::Index i = 0; i < nk; ++i) {
    adjacency(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < nk; ++j) {
      // Schur complements of Laplacians have non-positive off-diagonals;
      // only rounding can push a zero weight below zero.
      const double w = std::max(0.0, -0.5 * (reduced(i, j) + reduced(j, i)));
      adjacency(i, j) = adjacency(j, i) = w;
    }
  }
  std::vector<GraphVertex> vertices;
  vertices.reserve(keep.size());
  for (std::size_t k : keep) vertices.push_back(graph.vertices()[k]);
  return {std::move(vertices), std::move(adjacency)};
}

WeightedGraph kron_reduce(const WeightedGraph& graph, std::size_t keep_count) {
  const std::size_t n = graph.size();
  if (keep_count < 2 || keep_count > n) {
    throw ParameterError("keep_count must lie in [2, N]");
  }
  if (keep_count == n) return graph;
  const auto decomp = decompose(laplacian(graph));
  const auto keep = select_kron_nodes(graph, decomp, keep_count);
  return kron_reduce(graph, keep);
}

std::size_t reduced_node_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ParameterError("fraction must lie in [0, 1)");
  // Slack keeps e.g. 192 * 0.6 = 115.19999... from losing a node to rounding.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - fraction) + 1e-9));
}

}  // namespace graphwave
