#include "linbp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "linbp/text_io.hpp"

namespace linbp {

ParseError::ParseError(std::size_t line, const std::string& what)
    : GraphError("line " + std::to_string(line) + ": " + what), line_(line) {}

DuplicateEdgeError::DuplicateEdgeError(NodeId source, NodeId target)
    : GraphError("duplicate edge " + std::to_string(source) + " -> " + std::to_string(target)),
      source_(source),
      target_(target) {}

SelfLoopError::SelfLoopError(NodeId node)
    : GraphError("self-loop at node " + std::to_string(node)), node_(node) {}

// ---------------------------------------------------------------------------
// NodeLabels

NodeLabels::NodeLabels(std::vector<std::string> names) : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], static_cast<NodeId>(i)).second) {
      throw GraphError("duplicate node label '" + names_[i] + "'");
    }
  }
}

std::string NodeLabels::name(NodeId node) const {
  if (is_identity()) return std::to_string(node);
  return names_.at(node);
}

std::optional<NodeId> NodeLabels::find(std::string_view token, std::size_t num_nodes) const {
  if (is_identity()) {
    auto id = text::parse_int<NodeId>(token);
    if (!id || *id >= num_nodes) return std::nullopt;
    return id;
  }
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeLabels NodeLabels::extended(std::size_t old_size, std::span<const std::string> added) const {
  if (is_identity()) return {};
  if (names_.size() != old_size) throw GraphError("label count does not match node count");
  auto names = names_;
  names.insert(names.end(), added.begin(), added.end());
  return NodeLabels(std::move(names));
}

// ---------------------------------------------------------------------------
// CsrAdjacency

CsrAdjacency::CsrAdjacency(std::size_t num_nodes, std::vector<Edge> entries, NodeLabels labels)
    : labels_(std::move(labels)) {
  if (num_nodes >= std::numeric_limits<NodeId>::max()) throw GraphError("too many nodes");
  for (const auto& e : entries) {
    if (e.source >= num_nodes || e.target >= num_nodes) {
      throw GraphError("entry " + std::to_string(e.source) + " -> " + std::to_string(e.target) +
                       " references a node outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (e.source == e.target) throw SelfLoopError(e.source);
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw GraphError("entry " + std::to_string(e.source) + " -> " + std::to_string(e.target) +
                       " has non-positive weight");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].source == entries[i - 1].source && entries[i].target == entries[i - 1].target) {
      throw DuplicateEdgeError(entries[i].source, entries[i].target);
    }
  }

  row_offsets_.assign(num_nodes + 1, 0);
  col_targets_.reserve(entries.size());
  weights_.reserve(entries.size());
  for (const auto& e : entries) {
    ++row_offsets_[e.source + 1];
    col_targets_.push_back(e.target);
    weights_.push_back(e.weight);
  }
  for (std::size_t i = 0; i < num_nodes; ++i) row_offsets_[i + 1] += row_offsets_[i];
}

double CsrAdjacency::weight(NodeId s, NodeId t) const {
  auto row = neighbors(s);
  auto it = std::lower_bound(row.begin(), row.end(), t);
  if (it == row.end() || *it != t) return 0.0;
  return weights_[row_offsets_[s] + static_cast<std::size_t>(it - row.begin())];
}

std::vector<Edge> CsrAdjacency::entries() const {
  std::vector<Edge> out;
  out.reserve(num_entries());
  for (NodeId s = 0; s < num_nodes(); ++s) {
    auto targets = neighbors(s);
    auto ws = neighbor_weights(s);
    for (std::size_t j = 0; j < targets.size(); ++j) out.push_back({s, targets[j], ws[j]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, NodeLabels labels) {
  std::vector<Edge> entries;
  entries.reserve(2 * edges.size());
  for (const auto& e : edges) {
    if (e.source == e.target) throw SelfLoopError(e.source);
    entries.push_back(e);
    entries.push_back({e.target, e.source, e.weight});
  }
  return Graph(num_nodes, std::move(entries), std::move(labels));
}

Graph Graph::from_entries(std::size_t num_nodes, std::vector<Edge> entries, NodeLabels labels) {
  Graph g(num_nodes, std::move(entries), std::move(labels));
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    auto targets = g.neighbors(s);
    auto ws = g.neighbor_weights(s);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (g.weight(targets[j], s) != ws[j]) {
        throw GraphError("asymmetric entry " + std::to_string(s) + " -> " +
                         std::to_string(targets[j]));
      }
    }
  }
  return g;
}

std::vector<Edge> Graph::undirected_edges() const {
  std::vector<Edge> out;
  out.reserve(num_entries() / 2);
  for (NodeId s = 0; s < num_nodes(); ++s) {
    auto targets = neighbors(s);
    auto ws = neighbor_weights(s);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (s < targets[j]) out.push_back({s, targets[j], ws[j]});
    }
  }
  return out;
}

Graph Graph::with_edges(std::span<const Edge> added) const {
  auto all = entries();
  all.reserve(all.size() + 2 * added.size());
  for (const auto& e : added) {
    if (e.source == e.target) throw SelfLoopError(e.source);
    all.push_back(e);
    all.push_back({e.target, e.source, e.weight});
  }
  return Graph(num_nodes(), std::move(all), labels());
}

Graph Graph::with_nodes(std::size_t count, std::span<const std::string> names) const {
  if (!labels().is_identity() && names.size() != count) {
    throw GraphError("token-labelled graphs need a name for every added node");
  }
  return Graph(num_nodes() + count, entries(), labels().extended(num_nodes(), names));
}

std::vector<std::size_t> Graph::mirror_entries() const {
  std::vector<std::size_t> mirror(num_entries());
  const auto offsets = row_offsets();
  for (NodeId s = 0; s < num_nodes(); ++s) {
    auto targets = neighbors(s);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      auto row = neighbors(targets[j]);
      auto it = std::lower_bound(row.begin(), row.end(), s);
      mirror[offsets[s] + j] = offsets[targets[j]] + static_cast<std::size_t>(it - row.begin());
    }
  }
  return mirror;
}

// ---------------------------------------------------------------------------
// DirectedGraph

DirectedGraph DirectedGraph::from_entries(std::size_t num_nodes, std::vector<Edge> entries,
                                          NodeLabels labels) {
  return DirectedGraph(num_nodes, std::move(entries), std::move(labels));
}

DirectedGraph DirectedGraph::transposed() const {
  auto all = entries();
  for (auto& e : all) std::swap(e.source, e.target);
  return DirectedGraph(num_nodes(), std::move(all), labels());
}

bool DirectedGraph::is_acyclic() const {
  // Kahn's algorithm: acyclic iff every node gets popped.
  std::vector<std::size_t> indegree(num_nodes(), 0);
  for (NodeId t : col_targets()) ++indegree[t];
  std::vector<NodeId> ready;
  for (NodeId v = 0; v < num_nodes(); ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::size_t popped = 0;
  while (!ready.empty()) {
    NodeId v = ready.back();
    ready.pop_back();
    ++popped;
    for (NodeId t : neighbors(v)) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  return popped == num_nodes();
}

DegreeVector degree_vector(const CsrAdjacency& g) {
  DegreeVector d(g.num_nodes(), 0.0);
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    for (double w : g.neighbor_weights(s)) d[s] += w * w;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Edge-list text format

namespace {

struct RawEdge {
  std::string source;
  std::string target;
  double weight;
  std::size_t line;
};

std::vector<RawEdge> read_raw_edges(std::istream& in) {
  std::vector<RawEdge> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "expected 'src<TAB>dst[<TAB>weight]'");
    }
    double w = 1.0;
    if (fields.size() == 3) {
      auto parsed = text::parse_double(fields[2]);
      if (!parsed) throw ParseError(line_no, "bad weight '" + std::string(fields[2]) + "'");
      w = *parsed;
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw ParseError(line_no, "weight must be positive and finite");
      }
    }
    raw.push_back({std::string(fields[0]), std::string(fields[1]), w, line_no});
  }
  return raw;
}

}  // namespace

Graph load_edge_list(std::istream& in, EdgeListOptions options) {
  auto raw = read_raw_edges(in);

  const bool integer_ids = std::all_of(raw.begin(), raw.end(), [](const RawEdge& e) {
    return text::parse_int<NodeId>(e.source) && text::parse_int<NodeId>(e.target);
  });

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  std::size_t n = 0;
  NodeLabels labels;
  if (integer_ids) {
    for (const auto& r : raw) {
      NodeId s = *text::parse_int<NodeId>(r.source);
      NodeId t = *text::parse_int<NodeId>(r.target);
      if (s == t) throw ParseError(r.line, "self-loop at node " + r.source);
      n = std::max<std::size_t>(n, std::max(s, t) + std::size_t{1});
      edges.push_back({s, t, r.weight});
    }
    n = std::max(n, options.min_nodes);
  } else {
    std::vector<std::string> names;
    std::unordered_map<std::string, NodeId> index;
    auto intern = [&](const std::string& token) {
      auto [it, inserted] = index.emplace(token, static_cast<NodeId>(names.size()));
      if (inserted) names.push_back(token);
      return it->second;
    };
    for (const auto& r : raw) {
      if (r.source == r.target) throw ParseError(r.line, "self-loop at node " + r.source);
      NodeId s = intern(r.source);
      NodeId t = intern(r.target);
      edges.push_back({s, t, r.weight});
    }
    n = names.size();
    labels = NodeLabels(std::move(names));
  }

  if (options.directed) return Graph::from_entries(n, std::move(edges), std::move(labels));
  return Graph::from_edges(n, edges, std::move(labels));
}

Graph load_edge_list_file(const std::string& path, EdgeListOptions options) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open edge list '" + path + "'");
  return load_edge_list(in, options);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  const auto& labels = g.labels();
  for (const auto& e : g.undirected_edges()) {
    out << labels.name(e.source) << '\t' << labels.name(e.target);
    if (e.weight != 1.0) out << '\t' << text::format_double(e.weight);
    out << '\n';
  }
}

std::vector<Edge> load_edges_for(std::istream& in, const CsrAdjacency& g) {
  std::vector<Edge> edges;
  for (const auto& r : read_raw_edges(in)) {
    auto s = g.labels().find(r.source, g.num_nodes());
    auto t = g.labels().find(r.target, g.num_nodes());
    if (!s) throw ParseError(r.line, "unknown node '" + r.source + "'");
    if (!t) throw ParseError(r.line, "unknown node '" + r.target + "'");
    if (*s == *t) throw ParseError(r.line, "self-loop at node " + r.source);
    edges.push_back({*s, *t, r.weight});
  }
  return edges;
}

}  // namespace linbp
