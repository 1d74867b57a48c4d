#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "linbp/eval.hpp"
#include "linbp/linbp.hpp"

using namespace linbp;

namespace {

ResidualCoupling fraud(double eps) { return center(fixtures::fraud_coupling()).with_epsilon(eps); }

ResidualCoupling binary(double h) {
  Matrix m(2, 2);
  m << h, -h, -h, h;
  return ResidualCoupling(m);
}

Matrix random_matrix(SplitMix64& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform01() * 2 - 1;
  return m;
}

}  // namespace

TEST_SUITE("linbp") {
  TEST_CASE("vec stacks columns and devec inverts it") {
    Matrix x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    Vector v = vectorize(x);
    Vector expected(6);
    expected << 1, 4, 2, 5, 3, 6;
    CHECK(v == expected);
    CHECK(devectorize(v, 2, 3) == x);
    CHECK_THROWS_AS(devectorize(v, 4, 2), std::invalid_argument);
  }

  TEST_CASE("first step returns the explicit beliefs") {
    Graph g = fixtures::torus8();
    auto d = degree_vector(g);
    SplitMix64 rng(1);
    auto e = fixtures::random_residual(rng, 8, 3, 3);
    auto zero = BeliefMatrix::residual_zeros(8, 3);
    for (Variant v : {Variant::linbp, Variant::linbp_star}) {
      CHECK(linbp_step(g, d, fraud(0.3), e, zero, v).values() == e.values());
      auto any = fixtures::random_residual(rng, 8, 3, 8);
      ResidualCoupling none(Matrix::Zero(3, 3));
      CHECK(linbp_step(g, d, none, e, any, v).values() == e.values());
    }
  }

  TEST_CASE("two-node hand example") {
    Graph g = fixtures::path(2);
    auto d = degree_vector(g);
    Matrix e = Matrix::Zero(2, 2);
    e.row(0) << 0.05, -0.05;
    BeliefMatrix eb(e, BeliefMode::residual);
    auto out = linbp_step(g, d, binary(0.1), eb, eb, Variant::linbp_star).values();
    CHECK(out(1, 0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(out(1, 1) == doctest::Approx(-0.01).epsilon(1e-12));
    CHECK(out.row(0) == e.row(0));
  }

  TEST_CASE("dimension mismatches are rejected") {
    Graph g = fixtures::path(3);
    auto d = degree_vector(g);
    auto e = BeliefMatrix::residual_zeros(2, 3);
    CHECK_THROWS_AS(linbp_step(g, d, fraud(0.1), e, e, Variant::linbp), std::invalid_argument);
    auto normalized = BeliefMatrix::uniform(3, 3);
    CHECK_THROWS_AS(linbp_iterate(g, d, fraud(0.1), normalized, Variant::linbp),
                    std::invalid_argument);
  }

  TEST_CASE("operator is linear") {
    SplitMix64 rng(2);
    Graph g = fixtures::random_graph(rng, 15, 20, true);
    auto d = degree_vector(g);
    for (Variant v : {Variant::linbp, Variant::linbp_star}) {
      LinearOperator op(g, d, fraud(0.4), v);
      Matrix x = random_matrix(rng, 15, 3);
      Matrix y = random_matrix(rng, 15, 3);
      const double a = 0.7;
      const double b = -2.5;
      Matrix lhs = op.apply(a * x + b * y);
      Matrix rhs = a * op.apply(x) + b * op.apply(y);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("Kronecker identity for the matrix-free product") {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      auto n = 1 + static_cast<Eigen::Index>(rng.below(6));
      auto k = 1 + static_cast<Eigen::Index>(rng.below(4));
      Matrix a = random_matrix(rng, n, n);
      Matrix x = random_matrix(rng, n, k);
      Matrix h = random_matrix(rng, k, k);
      Vector lhs = vectorize(a * x * h);
      Vector rhs = kronecker(h.transpose(), a) * vectorize(x);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("iteration follows the materialized Jacobi recurrence") {
    SplitMix64 rng(6);
    Graph g = fixtures::random_graph(rng, 9, 8, true);
    auto d = degree_vector(g);
    auto e = fixtures::random_residual(rng, 9, 3, 3);
    for (Variant v : {Variant::linbp, Variant::linbp_star}) {
      LinearOperator op(g, d, fraud(0.15), v);
      Matrix m = op.materialize();
      Vector x = Vector::Zero(27);
      const Vector ev = vectorize(e.values());
      for (int it = 1; it <= 8; ++it) {
        x = ev + m * x;
        LinbpOptions opt;
        opt.max_iters = it;
        opt.tol = 0;
        auto r = linbp_iterate(g, d, fraud(0.15), e, v, opt);
        CHECK((vectorize(r.beliefs.values()) - x).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("closed form agrees with the iterative fixed point") {
    SplitMix64 rng(8);
    Graph g = fixtures::random_graph(rng, 30, 30);
    auto d = degree_vector(g);
    auto e = fixtures::random_residual(rng, 30, 3, 5);
    for (Variant v : {Variant::linbp, Variant::linbp_star}) {
      auto report = convergence_report(g, d, fraud(1.0), v);
      auto r = fraud(0.5 * report.epsilon_sufficient);
      LinbpOptions opt;
      opt.max_iters = 1000;
      opt.tol = 1e-13;
      auto it = linbp_iterate(g, d, r, e, v, opt);
      REQUIRE(it.converged);
      auto cf = linbp_closed_form(g, d, r, e, v);
      CHECK((it.beliefs.values() - cf.values()).cwiseAbs().maxCoeff() < 1e-10);
      auto again = linbp_step(g, d, r, e, it.beliefs, v);
      CHECK((again.values() - it.beliefs.values()).cwiseAbs().maxCoeff() < opt.tol);
    }
  }

  TEST_CASE("closed form corner cases") {
    Graph g = fixtures::torus8();
    auto d = degree_vector(g);
    SplitMix64 rng(10);
    auto e = fixtures::random_residual(rng, 8, 3, 2);
    ResidualCoupling none(Matrix::Zero(3, 3));
    CHECK((linbp_closed_form(g, d, none, e, Variant::linbp).values() - e.values()).isZero());
    ResidualCoupling one(Matrix::Zero(1, 1));
    auto e1 = BeliefMatrix::residual_zeros(8, 1);
    CHECK(linbp_closed_form(g, d, one, e1, Variant::linbp).values().isZero());
    CHECK_THROWS_AS(linbp_closed_form(g, d, fraud(0.1), e, Variant::linbp, 10), SizeLimitError);

    // The star variant's system is singular exactly at the eigenvalue
    // threshold 1/(rho(H_o) rho(A)) when the top eigenvalues align.
    Graph pair = fixtures::path(2);
    auto dp = degree_vector(pair);
    auto e2 = BeliefMatrix::residual_zeros(2, 2);
    CHECK_THROWS_AS(linbp_closed_form(pair, dp, binary(0.5), e2, Variant::linbp_star),
                    SingularSystemError);
  }

  TEST_CASE("divergence is reported with its iteration number") {
    Graph g = fixtures::torus8();
    auto d = degree_vector(g);
    SplitMix64 rng(12);
    auto e = fixtures::random_residual(rng, 8, 3, 2);
    LinbpOptions opt;
    opt.max_iters = 100000;
    opt.magnitude_cap = 1e6;
    try {
      linbp_iterate(g, d, fraud(2.0), e, Variant::linbp_star, opt);
      FAIL("expected divergence");
    } catch (const DivergenceError& err) {
      CHECK(err.iteration() > 1);
      CHECK(err.history().size() == static_cast<std::size_t>(err.iteration()));
    }
    opt.max_iters = 20;
    opt.magnitude_cap = 1e100;
    auto r = linbp_iterate(g, d, fraud(2.0), e, Variant::linbp_star, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.residual_history.back() > r.residual_history.front());
  }

  TEST_CASE("zero coupling converges in one step") {
    Graph g = fixtures::torus8();
    auto d = degree_vector(g);
    SplitMix64 rng(13);
    auto e = fixtures::random_residual(rng, 8, 3, 3);
    auto r = linbp_iterate(g, d, ResidualCoupling(Matrix::Zero(3, 3)), e, Variant::linbp);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(r.beliefs.values() == e.values());
  }

  TEST_CASE("non-simplified variant differs from LinBP by O(eps^2)") {
    SplitMix64 rng(14);
    Graph g = fixtures::random_graph(rng, 10, 8);
    auto d = degree_vector(g);
    auto e = fixtures::random_residual(rng, 10, 3, 3);
    LinbpOptions opt;
    opt.tol = 1e-18;
    opt.max_iters = 200;
    ResidualCoupling none(Matrix::Zero(3, 3));
    CHECK(linbp_nonsimplified(g, d, none, e, opt).beliefs.values() == e.values());
    double previous = 0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      auto r = fraud(eps);
      Matrix full = linbp_nonsimplified(g, d, r, e, opt).beliefs.values();
      Matrix simple = linbp_closed_form(g, d, r, e, Variant::linbp).values();
      // Both agree with E + eps-terms; the gap relative to the signal
      // beyond E shrinks like eps^2.
      double gap = (full - simple).cwiseAbs().maxCoeff() / (simple - e.values()).cwiseAbs().maxCoeff();
      CHECK(gap < 10 * eps * eps);
      if (previous > 0) CHECK(gap < previous);
      previous = gap;
    }
  }

  TEST_CASE("binary closed form") {
    Graph g = Graph::from_edges(1, {});
    auto d = degree_vector(g);
    Vector e(1);
    e << 0.1;
    CHECK(binary_closed_form(g, d, 0.2, e)[0] == doctest::Approx(0.1));
    SplitMix64 rng(15);
    Graph h = fixtures::random_graph(rng, 12, 10, true);
    auto dh = degree_vector(h);
    auto eb = fixtures::random_residual(rng, 12, 2, 4);
    Vector col = eb.values().col(0);
    CHECK((binary_closed_form(h, dh, 0.0, col) - col).isZero());
    LinbpOptions opt;
    opt.tol = 1e-16;
    opt.max_iters = 2000;
    auto ns = linbp_nonsimplified(h, dh, binary(0.05), eb, opt);
    CHECK((binary_closed_form(h, dh, 0.05, col) - ns.beliefs.values().col(0)).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK_THROWS_AS(binary_closed_form(h, dh, 0.5, col), std::invalid_argument);
  }

  TEST_CASE("scaling the explicit beliefs scales the result") {
    SplitMix64 rng(16);
    Graph g = fixtures::random_graph(rng, 20, 15);
    auto d = degree_vector(g);
    auto e = fixtures::random_residual(rng, 20, 3, 4);
    auto r = fraud(0.1);
    Matrix base = linbp_closed_form(g, d, r, e, Variant::linbp).values();
    auto top = top_beliefs(BeliefMatrix(base, BeliefMode::residual));
    for (double lambda : {1e-3, 7.0, 1e3}) {
      BeliefMatrix scaled(lambda * e.values(), BeliefMode::residual);
      Matrix out = linbp_closed_form(g, d, r, scaled, Variant::linbp).values();
      CHECK((out - lambda * base).cwiseAbs().maxCoeff() <= 1e-10 * lambda * base.cwiseAbs().maxCoeff());
      CHECK(top_beliefs(BeliefMatrix(out, BeliefMode::residual)).classes == top.classes);
    }
  }

  TEST_CASE("threaded iteration matches the reference") {
    SplitMix64 rng(17);
    Graph g = fixtures::random_graph(rng, 300, 400);
    auto d = degree_vector(g);
    auto e = fixtures::random_residual(rng, 300, 3, 20);
    LinbpOptions one;
    LinbpOptions four;
    four.threads = 4;
    auto a = linbp_iterate(g, d, fraud(0.05), e, Variant::linbp, one);
    auto b = linbp_iterate(g, d, fraud(0.05), e, Variant::linbp, four);
    CHECK(a.beliefs.values() == b.beliefs.values());
  }
}
