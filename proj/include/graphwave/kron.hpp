#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "graphwave/spectral.hpp"

namespace graphwave {

/// Ranks vertices by their energy in the `keep_count` highest-frequency
/// Laplacian eigenvectors, sum_l u_l(n)^2, and returns the indices of the
/// `keep_count` most energetic ones in ascending index order. Equal energies
/// prefer the older timestamp.
std::vector<std::size_t> select_kron_nodes(const WeightedGraph& graph,
                                           const LaplacianDecomposition& decomp,
                                           std::size_t keep_count);

/// Schur complement L_kk - L_kr L_rr^-1 L_rk over the kept indices.
/// Throws ReductionError when L_rr is singular, i.e. some removed vertices
/// have no path to a kept vertex.
Eigen::MatrixXd kron_reduce_laplacian(const Eigen::MatrixXd& laplacian,
                                      std::span<const std::size_t> keep);

/// Kron reduction onto an explicit vertex subset (ascending indices).
WeightedGraph kron_reduce(const WeightedGraph& graph, std::span<const std::size_t> keep);

/// Kron reduction keeping `keep_count` vertices chosen by select_kron_nodes.
/// 2 <= keep_count <= N; keep_count == N returns the graph unchanged.
WeightedGraph kron_reduce(const WeightedGraph& graph, std::size_t keep_count);

/// Vertices left after removing `fraction` of `n`, rounded down.
std::size_t reduced_node_count(std::size_t n, double fraction);

}  // namespace graphwave
