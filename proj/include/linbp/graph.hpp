#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace linbp {

using NodeId = std::uint32_t;

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed edge-list input. `line()` is 1-based.
class ParseError : public GraphError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateEdgeError : public GraphError {
 public:
  DuplicateEdgeError(NodeId source, NodeId target);
  NodeId source() const noexcept { return source_; }
  NodeId target() const noexcept { return target_; }

 private:
  NodeId source_;
  NodeId target_;
};

class SelfLoopError : public GraphError {
 public:
  explicit SelfLoopError(NodeId node);
  NodeId node() const noexcept { return node_; }

 private:
  NodeId node_;
};

/// External names of nodes. The identity labelling maps node i to the
/// decimal string "i"; a token labelling stores one name per node.
class NodeLabels {
 public:
  NodeLabels() = default;
  explicit NodeLabels(std::vector<std::string> names);

  bool is_identity() const noexcept { return names_.empty(); }
  std::string name(NodeId node) const;
  std::optional<NodeId> find(std::string_view token, std::size_t num_nodes) const;

  /// Labels for a graph grown from `old_size` to `old_size + added.size()`
  /// nodes. Identity labellings ignore `added`.
  NodeLabels extended(std::size_t old_size, std::span<const std::string> added) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Compressed-sparse-row storage shared by the symmetric and directed graph
/// types. Rows are sorted by target, weights are strictly positive, and
/// there are no self-loops or duplicate entries.
class CsrAdjacency {
 public:
  CsrAdjacency() : row_offsets_(1, 0) {}

  std::size_t num_nodes() const noexcept { return row_offsets_.size() - 1; }
  /// Number of stored directed entries (an undirected edge counts twice).
  std::size_t num_entries() const noexcept { return col_targets_.size(); }

  std::span<const NodeId> neighbors(NodeId s) const {
    return {col_targets_.data() + row_offsets_[s], row_offsets_[s + 1] - row_offsets_[s]};
  }
  std::span<const double> neighbor_weights(NodeId s) const {
    return {weights_.data() + row_offsets_[s], row_offsets_[s + 1] - row_offsets_[s]};
  }
  std::size_t degree(NodeId s) const { return row_offsets_[s + 1] - row_offsets_[s]; }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const NodeId> col_targets() const noexcept { return col_targets_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Weight of entry s->t, or 0 when absent.
  double weight(NodeId s, NodeId t) const;
  bool has_entry(NodeId s, NodeId t) const { return weight(s, t) != 0.0; }

  /// All stored entries in row-major order.
  std::vector<Edge> entries() const;

  const NodeLabels& labels() const noexcept { return labels_; }

 protected:
  CsrAdjacency(std::size_t num_nodes, std::vector<Edge> entries, NodeLabels labels);

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> col_targets_;
  std::vector<double> weights_;
  NodeLabels labels_;
};

/// Undirected weighted graph: every entry (s,t,w) has its mirror (t,s,w).
class Graph : public CsrAdjacency {
 public:
  Graph() = default;

  /// Builds from undirected edges, storing each in both directions.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          NodeLabels labels = {});
  /// Builds from directed entries that must already be symmetric.
  static Graph from_entries(std::size_t num_nodes, std::vector<Edge> entries,
                            NodeLabels labels = {});

  /// Each undirected edge once, with source < target.
  std::vector<Edge> undirected_edges() const;

  /// A copy with extra undirected edges. Throws DuplicateEdgeError when an
  /// edge already exists.
  Graph with_edges(std::span<const Edge> added) const;
  /// A copy with `count` extra isolated nodes.
  Graph with_nodes(std::size_t count, std::span<const std::string> names = {}) const;

  /// For every stored entry s->t (in CSR order), the position of t->s.
  std::vector<std::size_t> mirror_entries() const;

 private:
  using CsrAdjacency::CsrAdjacency;
};

/// Directed graph in the same layout, without the symmetry requirement.
class DirectedGraph : public CsrAdjacency {
 public:
  DirectedGraph() = default;
  static DirectedGraph from_entries(std::size_t num_nodes, std::vector<Edge> entries,
                                    NodeLabels labels = {});

  DirectedGraph transposed() const;
  bool is_acyclic() const;

 private:
  using CsrAdjacency::CsrAdjacency;
};

/// d[s] = sum of squared weights of the entries in row s.
using DegreeVector = std::vector<double>;
DegreeVector degree_vector(const CsrAdjacency& g);

struct EdgeListOptions {
  /// When false every line is one undirected edge. When true lines are
  /// directed entries and the result must still be symmetric.
  bool directed = false;
  /// Lower bound on n for integer ids, so trailing isolated nodes survive.
  std::size_t min_nodes = 0;
};

/// Reads `src TAB dst [TAB weight]` lines; `#` lines and blank lines are
/// skipped. If every id is a nonnegative integer the ids are used as node
/// indices directly; otherwise ids are tokens numbered in first-seen order.
Graph load_edge_list(std::istream& in, EdgeListOptions options = {});
Graph load_edge_list_file(const std::string& path, EdgeListOptions options = {});

/// Writes each undirected edge once using the graph's labels. Weights equal
/// to 1 are omitted.
void write_edge_list(std::ostream& out, const Graph& g);

/// Parses edges by label against an existing graph (used for deltas).
std::vector<Edge> load_edges_for(std::istream& in, const CsrAdjacency& g);

}  // namespace linbp
