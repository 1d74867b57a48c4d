#include "linbp/sbp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "linbp/text_io.hpp"

namespace linbp {

double population_sd(const Vector& x) {
  if (x.size() == 0) return 0.0;
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().mean());
}

Vector standardize(const Vector& x) {
  if (x.size() == 0) return x;
  const double sd = population_sd(x);
  if (sd == 0.0) return Vector::Zero(x.size());
  return (x.array() - x.mean()) / sd;
}

GeodesicIndex GeodesicIndex::from_distances(std::vector<Geodesic> distance) {
  GeodesicIndex gi;
  gi.distance = std::move(distance);
  for (NodeId v = 0; v < gi.distance.size(); ++v) {
    const Geodesic level = gi.distance[v];
    if (level == kUnreachable) continue;
    if (level >= gi.levels.size()) gi.levels.resize(level + 1);
    gi.levels[level].push_back(v);
  }
  return gi;
}

GeodesicIndex geodesic_index(const Graph& g, std::span<const NodeId> explicit_nodes) {
  std::vector<Geodesic> distance(g.num_nodes(), kUnreachable);
  std::deque<NodeId> queue;
  std::vector<NodeId> sources(explicit_nodes.begin(), explicit_nodes.end());
  std::sort(sources.begin(), sources.end());
  for (NodeId v : sources) {
    if (v >= g.num_nodes()) throw std::out_of_range("explicit node outside the graph");
    if (distance[v] == 0) continue;
    distance[v] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    NodeId s = queue.front();
    queue.pop_front();
    for (NodeId t : g.neighbors(s)) {
      if (distance[t] == kUnreachable) {
        distance[t] = distance[s] + 1;
        queue.push_back(t);
      }
    }
  }
  return GeodesicIndex::from_distances(std::move(distance));
}

namespace {

// b_t = (sum over parents s of w(s,t) b_s) H, reading beliefs from `source`.
Eigen::RowVectorXd from_parents(const SbpState& st, const Matrix& source, NodeId t) {
  const Geodesic level = st.geodesics.distance[t];
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(st.classes());
  if (level == 0 || level == kUnreachable) return acc;
  auto targets = st.graph.neighbors(t);
  auto weights = st.graph.neighbor_weights(t);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (st.geodesics.distance[targets[j]] + 1 == level) acc += weights[j] * source.row(targets[j]);
  }
  return acc * st.coupling;
}

std::uint64_t parent_count(const SbpState& st, NodeId t) {
  const Geodesic level = st.geodesics.distance[t];
  if (level == 0 || level == kUnreachable) return 0;
  std::uint64_t count = 0;
  for (NodeId s : st.graph.neighbors(t)) count += st.geodesics.distance[s] + 1 == level;
  return count;
}

void rebuild_levels(SbpState& st) {
  st.geodesics = GeodesicIndex::from_distances(std::move(st.geodesics.distance));
}

void check_coupling(const ResidualCoupling& r, const BeliefMatrix& e, const Graph& g) {
  if (e.mode() != BeliefMode::residual) throw std::invalid_argument("SBP expects residual beliefs");
  if (e.rows() != static_cast<Eigen::Index>(g.num_nodes()) || e.classes() != r.k()) {
    throw std::invalid_argument("explicit beliefs must be n x k");
  }
}

}  // namespace

SbpState sbp_run(const Graph& g, const ResidualCoupling& r, const BeliefMatrix& e) {
  check_coupling(r, e, g);
  SbpState st;
  st.graph = g;
  st.coupling = r.scaled();
  st.explicit_beliefs = e.values();
  st.geodesics = geodesic_index(g, e.explicit_nodes());
  st.beliefs = Matrix::Zero(e.rows(), e.classes());
  for (std::size_t level = 0; level < st.geodesics.levels.size(); ++level) {
    for (NodeId t : st.geodesics.levels[level]) {
      if (level == 0) {
        st.beliefs.row(t) = st.explicit_beliefs.row(t);
      } else {
        st.beliefs.row(t) = from_parents(st, st.beliefs, t);
        st.stats.edge_visits += parent_count(st, t);
      }
    }
  }
  return st;
}

SbpState sbp_restore(Graph g, const ResidualCoupling& r, const BeliefMatrix& e,
                     const BeliefMatrix& beliefs, std::vector<Geodesic> distance) {
  check_coupling(r, e, g);
  check_coupling(r, beliefs, g);
  if (distance.size() != g.num_nodes()) throw std::invalid_argument("geodesic count mismatch");
  SbpState st;
  st.graph = std::move(g);
  st.coupling = r.scaled();
  st.explicit_beliefs = e.values();
  st.beliefs = beliefs.values();
  st.geodesics = GeodesicIndex::from_distances(std::move(distance));
  return st;
}

void SbpState::add_nodes(std::size_t count, std::span<const std::string> names) {
  if (count == 0) return;
  graph = graph.with_nodes(count, names);
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  beliefs.conservativeResize(n, Eigen::NoChange);
  explicit_beliefs.conservativeResize(n, Eigen::NoChange);
  const auto added = static_cast<Eigen::Index>(count);
  beliefs.bottomRows(added).setZero();
  explicit_beliefs.bottomRows(added).setZero();
  geodesics.distance.resize(graph.num_nodes(), kUnreachable);
}

DirectedGraph modified_adjacency(const Graph& g, const GeodesicIndex& gi) {
  std::vector<Edge> kept;
  for (const auto& e : g.entries()) {
    const Geodesic gs = gi.distance[e.source];
    const Geodesic gt = gi.distance[e.target];
    if (gs != kUnreachable && gt != kUnreachable && gt == gs + 1) kept.push_back(e);
  }
  return DirectedGraph::from_entries(g.num_nodes(), std::move(kept), g.labels());
}

void sbp_update_beliefs(SbpState& st, std::span<const BeliefRow> rows) {
  st.stats.rounds = 0;
  if (rows.empty()) return;
  const auto n = st.graph.num_nodes();
  for (const auto& row : rows) {
    if (row.node >= n) throw std::out_of_range("belief update for unknown node");
    if (row.values.size() != st.classes()) throw std::invalid_argument("belief row has wrong length");
    if (!(row.values.array() != 0.0).any()) {
      throw std::invalid_argument("zero explicit belief rows (deletions) are not supported");
    }
  }

  std::vector<NodeId> frontier;
  std::vector<char> marked(n, 0);
  for (const auto& row : rows) {
    st.explicit_beliefs.row(row.node) = row.values.transpose();
    st.beliefs.row(row.node) = row.values.transpose();
    st.geodesics.distance[row.node] = 0;
    if (!marked[row.node]) {
      marked[row.node] = 1;
      frontier.push_back(row.node);
    }
  }
  std::fill(marked.begin(), marked.end(), 0);

  for (Geodesic level = 1; !frontier.empty(); ++level) {
    ++st.stats.rounds;
    std::vector<NodeId> next;
    for (NodeId s : frontier) {
      for (NodeId t : st.graph.neighbors(s)) {
        if (!marked[t] && st.geodesics.distance[t] >= level) {
          marked[t] = 1;
          next.push_back(t);
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (NodeId t : next) {
      marked[t] = 0;
      st.geodesics.distance[t] = level;
    }
    // Parents sit at level - 1 and were finished in the previous round.
    for (NodeId t : next) {
      st.beliefs.row(t) = from_parents(st, st.beliefs, t);
      st.stats.edge_visits += parent_count(st, t);
    }
    frontier = std::move(next);
  }
  rebuild_levels(st);
}

void sbp_update_edges(SbpState& st, std::span<const Edge> edges) {
  st.stats.rounds = 0;
  if (edges.empty()) return;
  const auto n = st.graph.num_nodes();
  for (const auto& e : edges) {
    if (e.source >= n || e.target >= n) throw GraphError("new edge references an unknown node");
  }
  st.graph = st.graph.with_edges(edges);
  auto& g = st.geodesics.distance;

  // Seeds: endpoints t of a new edge s-t with g(s) < g(t).
  std::vector<NodeId> seeds;
  std::vector<Geodesic> improved(n, kUnreachable);
  for (const auto& e : edges) {
    for (auto [s, t] : {std::pair{e.source, e.target}, std::pair{e.target, e.source}}) {
      if (g[s] != kUnreachable && g[s] < g[t]) {
        if (improved[t] == kUnreachable) seeds.push_back(t);
        improved[t] = std::min(improved[t], g[s] + 1);
      }
    }
  }
  std::sort(seeds.begin(), seeds.end());
  for (NodeId t : seeds) g[t] = std::min(g[t], improved[t]);

  auto recompute = [&](const std::vector<NodeId>& nodes) {
    Matrix updated(static_cast<Eigen::Index>(nodes.size()), st.classes());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      updated.row(static_cast<Eigen::Index>(i)) = from_parents(st, st.beliefs, nodes[i]);
      st.stats.edge_visits += parent_count(st, nodes[i]);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      st.beliefs.row(nodes[i]) = updated.row(static_cast<Eigen::Index>(i));
    }
  };
  recompute(seeds);

  std::vector<NodeId> frontier = std::move(seeds);
  std::vector<char> marked(n, 0);
  while (!frontier.empty()) {
    ++st.stats.rounds;
    if (static_cast<std::size_t>(st.stats.rounds) > n + 1) {
      throw std::logic_error("edge update did not terminate");
    }
    std::vector<NodeId> next;
    std::fill(improved.begin(), improved.end(), kUnreachable);
    for (NodeId s : frontier) {
      for (NodeId t : st.graph.neighbors(s)) {
        if (g[s] + 1 <= g[t]) {
          if (!marked[t]) {
            marked[t] = 1;
            next.push_back(t);
          }
          improved[t] = std::min(improved[t], g[s] + 1);
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (NodeId t : next) {
      marked[t] = 0;
      g[t] = std::min(g[t], improved[t]);
    }
    recompute(next);
    frontier = std::move(next);
  }
  rebuild_levels(st);
}

void write_geodesics(std::ostream& out, const GeodesicIndex& gi, const NodeLabels& labels) {
  for (NodeId v = 0; v < gi.distance.size(); ++v) {
    out << labels.name(v) << '\t';
    if (gi.distance[v] == kUnreachable) {
      out << "-1";
    } else {
      out << gi.distance[v];
    }
    out << '\n';
  }
}

std::vector<Geodesic> read_geodesics(std::istream& in, const CsrAdjacency& g) {
  std::vector<Geodesic> distance(g.num_nodes(), kUnreachable);
  std::vector<char> seen(g.num_nodes(), 0);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("geodesics line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line);
    if (fields.size() != 2) fail("expected `node TAB g`");
    auto node = g.labels().find(fields[0], g.num_nodes());
    if (!node) fail("unknown node '" + std::string(fields[0]) + "'");
    if (seen[*node]) fail("duplicate node");
    seen[*node] = 1;
    if (fields[1] == "-1") continue;
    auto value = text::parse_int<Geodesic>(fields[1]);
    if (!value || *value == kUnreachable) fail("bad geodesic number");
    distance[*node] = *value;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::runtime_error("geodesics file does not cover every node");
  }
  return distance;
}

}  // namespace linbp
