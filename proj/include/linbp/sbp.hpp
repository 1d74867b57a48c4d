#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/coupling.hpp"
#include "linbp/graph.hpp"

namespace linbp {

using Geodesic = std::uint32_t;
inline constexpr Geodesic kUnreachable = std::numeric_limits<Geodesic>::max();

/// z-scores with the population standard deviation; zero when sigma is 0.
Vector standardize(const Vector& x);
/// Population standard deviation of the entries.
double population_sd(const Vector& x);

struct GeodesicIndex {
  std::vector<Geodesic> distance;
  /// levels[i] lists the nodes at distance i in ascending id order.
  std::vector<std::vector<NodeId>> levels;

  static GeodesicIndex from_distances(std::vector<Geodesic> distance);
  bool reachable(NodeId v) const { return distance[v] != kUnreachable; }
  Geodesic max_level() const {
    return levels.empty() ? 0 : static_cast<Geodesic>(levels.size() - 1);
  }
};

/// Multi-source BFS from the explicit nodes.
GeodesicIndex geodesic_index(const Graph& g, std::span<const NodeId> explicit_nodes);

struct SbpStats {
  /// Directed edges read while computing beliefs, summed over operations.
  std::uint64_t edge_visits = 0;
  /// Frontier rounds of the last incremental update.
  int rounds = 0;
};

struct SbpState {
  Graph graph;
  GeodesicIndex geodesics;
  /// Residual beliefs; rows of unreachable nodes are zero.
  Matrix beliefs;
  Matrix explicit_beliefs;
  /// The coupling used for propagation (H^_o, or any positive multiple).
  Matrix coupling;
  SbpStats stats;

  int classes() const { return static_cast<int>(coupling.rows()); }
  BeliefMatrix belief_matrix() const { return BeliefMatrix(beliefs, BeliefMode::residual); }
  /// Appends isolated, unreachable nodes.
  void add_nodes(std::size_t count, std::span<const std::string> names = {});
};

SbpState sbp_run(const Graph& g, const ResidualCoupling& r, const BeliefMatrix& e);

/// Rebuilds a state from persisted parts without recomputing beliefs.
SbpState sbp_restore(Graph g, const ResidualCoupling& r, const BeliefMatrix& e,
                     const BeliefMatrix& beliefs, std::vector<Geodesic> distance);

/// Keeps only the entries s->t with g(t) = g(s) + 1.
DirectedGraph modified_adjacency(const Graph& g, const GeodesicIndex& gi);

struct BeliefRow {
  NodeId node;
  Vector values;
};

/// Sets or replaces explicit beliefs and repairs the affected nodes level by
/// level. Zero rows are rejected since deletions are not supported.
void sbp_update_beliefs(SbpState& state, std::span<const BeliefRow> rows);

/// Inserts undirected edges and repairs geodesic numbers and beliefs.
void sbp_update_edges(SbpState& state, std::span<const Edge> edges);

inline std::uint64_t sbp_edge_visit_count(const SbpState& state) {
  return state.stats.edge_visits;
}

/// `node TAB g`, with -1 for unreachable nodes.
void write_geodesics(std::ostream& out, const GeodesicIndex& gi, const NodeLabels& labels);
std::vector<Geodesic> read_geodesics(std::istream& in, const CsrAdjacency& g);

}  // namespace linbp
