#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "linbp/eval.hpp"
#include "linbp/linbp.hpp"

using namespace linbp;

namespace {

TopBeliefAssignment assignment(int k, std::vector<std::vector<int>> sets) {
  TopBeliefAssignment a;
  a.k = k;
  a.classes = std::move(sets);
  return a;
}

BeliefMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return BeliefMatrix(m, BeliefMode::residual);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("top beliefs with ties") {
    auto top = top_beliefs(rows({{1e-2, 1e-2, -2e-2}, {2, -1, -1}, {0, 0, 0}}));
    CHECK(top.classes[0] == std::vector<int>{0, 1});
    CHECK(top.classes[1] == std::vector<int>{0});
    CHECK(top.classes[2] == std::vector<int>{0, 1, 2});
    auto near = rows({{7.60009e-11, 7.60047e-11, -15.20056e-11}});
    CHECK(top_beliefs(near).classes[0] == std::vector<int>{1});
    CHECK(top_beliefs(near, 1e-14).classes[0] == std::vector<int>{0, 1});
  }

  TEST_CASE("top beliefs are invariant under positive scaling") {
    SplitMix64 rng(1);
    auto b = fixtures::random_residual(rng, 40, 4, 40);
    auto base = top_beliefs(b);
    for (double s : {1e-6, 0.5, 3.0, 1e5}) {
      CHECK(top_beliefs(BeliefMatrix(s * b.values(), BeliefMode::residual)).classes == base.classes);
    }
  }

  TEST_CASE("worked precision and recall example") {
    auto gt = assignment(3, {{0}, {1}, {2}});
    auto other = assignment(3, {{0, 1}, {1}, {1}});
    auto q = precision_recall(gt, other);
    CHECK(q.recall == 2.0 / 3.0);
    CHECK(q.precision == 0.5);
    CHECK(q.accuracy == doctest::Approx(2 * (2.0 / 3) * 0.5 / (2.0 / 3 + 0.5)));
    auto swapped = precision_recall(other, gt);
    CHECK(swapped.recall == q.precision);
    CHECK(swapped.precision == q.recall);
  }

  TEST_CASE("identical and disjoint assignments") {
    auto a = assignment(3, {{0}, {1, 2}});
    auto same = precision_recall(a, a);
    CHECK(same.recall == 1.0);
    CHECK(same.precision == 1.0);
    CHECK(same.accuracy == 1.0);
    auto b = assignment(3, {{1}, {0}});
    auto none = precision_recall(a, b);
    CHECK(none.recall == 0.0);
    CHECK(none.precision == 0.0);
    CHECK(none.accuracy == 0.0);
    CHECK_THROWS_AS(precision_recall(a, assignment(3, {{0}})), std::invalid_argument);
  }

  TEST_CASE("uninformative nodes are excluded unless requested") {
    auto a = assignment(2, {{0}, {0, 1}});
    auto b = assignment(2, {{0}, {0, 1}});
    auto q = precision_recall(a, b);
    CHECK(q.nodes == 1);
    CHECK(q.gt_count == 1);
    auto all = precision_recall(a, b, {.exclude_uninformative = false});
    CHECK(all.nodes == 2);
    CHECK(all.gt_count == 3);
  }

  TEST_CASE("log grid") {
    auto grid = log_grid(1e-6, 1e-2, 5);
    REQUIRE(grid.size() == 5);
    CHECK(grid.front() == 1e-6);
    CHECK(grid.back() == 1e-2);
    CHECK(grid[2] == doctest::Approx(1e-4));
    CHECK(log_grid(0.1, 0.1, 1) == std::vector<double>{0.1});
    CHECK_THROWS(log_grid(0, 1, 3));
  }

  // Seven-node binary tree with well separated explicit beliefs.
  struct TreeCase {
    Graph g = Graph::from_edges(7, std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}});
    ResidualCoupling base = center(fixtures::fraud_coupling());
    BeliefMatrix e = [] {
      Matrix m = Matrix::Zero(7, 3);
      m.row(3) << 0.1, -0.05, -0.05;
      m.row(6) << -0.05, -0.05, 0.1;
      return BeliefMatrix(m, BeliefMode::residual);
    }();
  };

  TEST_CASE("BP and LinBP agree on a tree at small epsilon") {
    TreeCase t;
    SweepOptions opt;
    opt.methods = {Method::linbp, Method::linbp_star, Method::sbp};
    opt.tol = 1e-10;
    opt.tol_power = 2;
    std::vector<double> grid{1e-4};
    auto result = epsilon_sweep(t.g, degree_vector(t.g), t.base, t.e, grid, opt);
    REQUIRE(result.rows.size() == 3);
    for (const auto& row : result.rows) {
      CHECK(row.converged);
      REQUIRE(row.quality);
      CHECK(row.quality->recall == 1.0);
      CHECK(row.quality->precision == 1.0);
    }
  }

  TEST_CASE("rows above the threshold are flagged") {
    TreeCase t;
    auto d = degree_vector(t.g);
    auto rep = convergence_report(t.g, d, t.base, Variant::linbp_star);
    SweepOptions opt;
    opt.methods = {Method::linbp_star};
    opt.ground_truth = Method::sbp;
    opt.max_iters = 300;
    std::vector<double> grid{0.5 * rep.epsilon_exact, 1.5 * rep.epsilon_exact};
    auto result = epsilon_sweep(t.g, d, t.base, t.e, grid, opt);
    CHECK(result.rows[0].converged);
    CHECK_FALSE(result.rows[1].converged);
    CHECK_FALSE(result.rows[1].quality.has_value());
    std::ostringstream csv;
    write_sweep_csv(csv, result);
    auto text = csv.str();
    CHECK(text.rfind("epsilon,method,converged,iters,recall,precision,accuracy,max_std_dev_from_sbp,"
                     "sigma_probe\n",
                     0) == 0);
    CHECK(text.find(",linbp_star,false,") != std::string::npos);
    CHECK(text.find(",,,,") != std::string::npos);
  }

  TEST_CASE("SBP against itself is constant across epsilon") {
    TreeCase t;
    SweepOptions opt;
    opt.methods = {Method::sbp};
    opt.ground_truth = Method::sbp;
    auto grid = log_grid(1e-5, 1e-1, 4);
    auto result = epsilon_sweep(t.g, degree_vector(t.g), t.base, t.e, grid, opt);
    REQUIRE(result.rows.size() == 4);
    for (const auto& row : result.rows) {
      CHECK(row.quality->accuracy == 1.0);
      CHECK(*row.max_std_dev_from_sbp == 0.0);
      CHECK(*row.sigma_probe == *result.rows[0].sigma_probe);
    }
    auto summary = result.summaries();
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].mean_accuracy == 1.0);
    CHECK(summary[0].min_accuracy == 1.0);
  }

  TEST_CASE("top-belief file format") {
    std::ostringstream out;
    write_top_beliefs(out, assignment(3, {{0}, {1, 2}}), NodeLabels({"a", "b"}));
    CHECK(out.str() == "a\t0\nb\t1,2\n");
  }
}
