#pragma once

#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/coupling.hpp"
#include "linbp/graph.hpp"
#include "linbp/rng.hpp"

namespace fixtures {

using linbp::Edge;
using linbp::Graph;
using linbp::Matrix;
using linbp::NodeId;

inline linbp::CouplingMatrix fraud_coupling() {
  Matrix h(3, 3);
  h << 0.6, 0.3, 0.1, 0.3, 0.0, 0.7, 0.1, 0.7, 0.2;
  return linbp::CouplingMatrix(h);
}

inline linbp::CouplingMatrix homophily2() {
  Matrix h(2, 2);
  h << 0.8, 0.2, 0.2, 0.8;
  return linbp::CouplingMatrix(h);
}

/// Eight nodes: a 4-cycle 4-5-6-7 (0-based) with pendants 0-4, 1-5, 2-6,
/// 3-7. Largest adjacency eigenvalue 1 + sqrt(2).
inline Graph torus8() {
  std::vector<Edge> edges{{0, 4}, {1, 5}, {2, 6}, {3, 7}, {4, 5}, {5, 6}, {6, 7}, {7, 4}};
  return Graph::from_edges(8, edges);
}

inline Graph path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({NodeId(i), NodeId(i + 1)});
  return Graph::from_edges(n, edges);
}

/// Connected random graph: a random spanning tree plus extra edges.
inline Graph random_graph(linbp::SplitMix64& rng, std::size_t n, std::size_t extra,
                          bool weighted = false) {
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  auto weight = [&] { return weighted ? 0.5 + rng.uniform01() : 1.0; };
  for (std::size_t v = 1; v < n; ++v) {
    auto u = static_cast<std::size_t>(rng.below(v));
    used[u][v] = used[v][u] = true;
    edges.push_back({NodeId(u), NodeId(v), weight()});
  }
  std::size_t tries = 0;
  while (extra > 0 && tries++ < 100 * n * n) {
    auto a = static_cast<std::size_t>(rng.below(n));
    auto b = static_cast<std::size_t>(rng.below(n));
    if (a == b || used[a][b]) continue;
    used[a][b] = used[b][a] = true;
    edges.push_back({NodeId(a), NodeId(b), weight()});
    --extra;
  }
  return Graph::from_edges(n, edges);
}

/// Residual rows with continuous values for a random subset of nodes.
inline linbp::BeliefMatrix random_residual(linbp::SplitMix64& rng, std::size_t n, int k,
                                           std::size_t count) {
  Matrix e = Matrix::Zero(static_cast<Eigen::Index>(n), k);
  std::vector<NodeId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = NodeId(i);
  for (std::size_t i = 0; i < count && i < n; ++i) {
    auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(ids[i], ids[j]);
    double sum = 0;
    for (int c = 0; c + 1 < k; ++c) {
      e(ids[i], c) = rng.uniform01() - 0.5;
      sum += e(ids[i], c);
    }
    e(ids[i], k - 1) = -sum;
  }
  return linbp::BeliefMatrix(e, linbp::BeliefMode::residual);
}

}  // namespace fixtures
