#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fixtures.hpp"
#include "linbp/graph.hpp"

using namespace linbp;

TEST_SUITE("graph") {
  TEST_CASE("path of two edges is stored in both directions") {
    std::istringstream in("0\t1\n1\t2\n");
    Graph g = load_edge_list(in);
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_entries() == 4);
    CHECK(g.has_entry(1, 0));
    CHECK(g.has_entry(2, 1));
    CHECK_FALSE(g.has_entry(0, 2));
  }

  TEST_CASE("empty input") {
    std::istringstream in("# nothing here\n\n");
    Graph g = load_edge_list(in);
    CHECK(g.num_nodes() == 0);
    CHECK(degree_vector(g).empty());
  }

  TEST_CASE("token ids and weights") {
    std::istringstream in("a\tb\t2.5\n");
    Graph g = load_edge_list(in);
    REQUIRE(g.num_nodes() == 2);
    CHECK(g.weight(0, 1) == 2.5);
    CHECK(g.weight(1, 0) == 2.5);
    CHECK(g.labels().name(0) == "a");
    CHECK(g.labels().find("b", 2) == NodeId{1});
    auto d = degree_vector(g);
    CHECK(d[0] == doctest::Approx(6.25));
    CHECK(d[1] == doctest::Approx(6.25));
  }

  TEST_CASE("space separated lines and CRLF endings are accepted") {
    std::istringstream in("0 1\r\n1 2 0.5\r\n");
    Graph g = load_edge_list(in);
    CHECK(g.num_entries() == 4);
    CHECK(g.weight(2, 1) == 0.5);
  }

  TEST_CASE("unweighted degrees equal neighbour counts") {
    Graph g = fixtures::torus8();
    auto d = degree_vector(g);
    for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK(d[v] == static_cast<double>(g.degree(v)));
    auto p = degree_vector(fixtures::path(3));
    CHECK(p == DegreeVector{1, 2, 1});
  }

  TEST_CASE("malformed lines report their line number") {
    std::istringstream in("0\t1\n# ok\nx\n");
    try {
      load_edge_list(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    std::istringstream bad_weight("0\t1\tabc\n");
    CHECK_THROWS_AS(load_edge_list(bad_weight), ParseError);
    std::istringstream negative("0\t1\t-1\n");
    CHECK_THROWS_AS(load_edge_list(negative), ParseError);
  }

  TEST_CASE("duplicates and self-loops are rejected") {
    std::istringstream dup("0\t1\n1\t0\n");
    CHECK_THROWS_AS(load_edge_list(dup), DuplicateEdgeError);
    std::istringstream loop("a\ta\n");
    CHECK_THROWS_AS(load_edge_list(loop), ParseError);
    std::vector<Edge> edges{{2, 2}};
    CHECK_THROWS_AS(Graph::from_edges(3, edges), SelfLoopError);
  }

  TEST_CASE("directed input must be symmetric") {
    std::istringstream ok("0\t1\t2\n1\t0\t2\n");
    CHECK(load_edge_list(ok, {.directed = true}).num_entries() == 2);
    std::istringstream asym("0\t1\n");
    CHECK_THROWS_AS(load_edge_list(asym, {.directed = true}), GraphError);
    std::istringstream mismatch("0\t1\t1\n1\t0\t2\n");
    CHECK_THROWS_AS(load_edge_list(mismatch, {.directed = true}), GraphError);
  }

  TEST_CASE("adjacency is an involution") {
    SplitMix64 rng(7);
    Graph g = fixtures::random_graph(rng, 30, 40, true);
    auto forward = g.entries();
    std::vector<Edge> backward;
    for (auto e : forward) backward.push_back({e.target, e.source, e.weight});
    auto key = [](const Edge& a, const Edge& b) {
      return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    };
    std::sort(backward.begin(), backward.end(), key);
    CHECK(forward == backward);
    auto mirror = g.mirror_entries();
    auto offsets = g.row_offsets();
    for (NodeId s = 0; s < g.num_nodes(); ++s) {
      for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) {
        CHECK(g.col_targets()[mirror[p]] == s);
        CHECK(mirror[mirror[p]] == p);
      }
    }
  }

  TEST_CASE("edge-list round trip reproduces the structure") {
    SplitMix64 rng(11);
    Graph g = fixtures::random_graph(rng, 25, 30, true);
    std::ostringstream out;
    write_edge_list(out, g);
    std::istringstream in(out.str());
    Graph h = load_edge_list(in);
    CHECK(h.num_nodes() == g.num_nodes());
    CHECK(h.entries() == g.entries());

    std::istringstream tokens("x\ty\t3\ny\tz\n");
    Graph t = load_edge_list(tokens);
    std::ostringstream out2;
    write_edge_list(out2, t);
    CHECK(out2.str() == "x\ty\t3\ny\tz\n");
  }

  TEST_CASE("growing a graph") {
    Graph g = fixtures::path(3);
    std::vector<Edge> more{{0, 2}};
    Graph h = g.with_edges(more);
    CHECK(h.num_entries() == 6);
    std::vector<Edge> again{{1, 0}};
    CHECK_THROWS_AS(g.with_edges(again), DuplicateEdgeError);
    Graph bigger = g.with_nodes(2);
    CHECK(bigger.num_nodes() == 5);
    CHECK(bigger.degree(4) == 0);
  }

  TEST_CASE("deltas resolve labels against the graph") {
    std::istringstream in("a\tb\nb\tc\n");
    Graph g = load_edge_list(in);
    std::istringstream delta("a\tc\t0.5\n");
    auto edges = load_edges_for(delta, g);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0] == Edge{0, 2, 0.5});
    std::istringstream unknown("a\tq\n");
    CHECK_THROWS_AS(load_edges_for(unknown, g), ParseError);
  }

  TEST_CASE("directed graphs: transpose and cycle detection") {
    auto dag = DirectedGraph::from_entries(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(dag.is_acyclic());
    auto t = dag.transposed();
    CHECK(t.has_entry(2, 0));
    CHECK_FALSE(t.has_entry(0, 2));
    auto cyc = DirectedGraph::from_entries(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK_FALSE(cyc.is_acyclic());
  }
}
