#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include "linbp/linbp.hpp"
#include "linbp/rng.hpp"
#include "linbp/text_io.hpp"

namespace linbp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Apply = std::function<Vector(const Vector&)>;

Vector random_unit(SplitMix64& rng, Eigen::Index dim) {
  Vector x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) x[i] = 2.0 * rng.uniform01() - 1.0;
  const double norm = x.norm();
  if (norm > 0) x /= norm;
  return x;
}

// Power iteration on M^2 for a symmetric M. x^T M^2 x = |Mx|^2 for unit x,
// which estimates rho^2 from below and increases monotonically.
SpectralEstimate symmetric_radius(const Apply& apply, Eigen::Index dim,
                                  const PowerOptions& options) {
  SpectralEstimate est;
  if (dim == 0) {
    est.reliable = true;
    return est;
  }
  SplitMix64 rng(options.seed);
  Vector x = random_unit(rng, dim);
  int restarts = 0;
  double previous = -1.0;
  for (int step = 1; step <= options.max_steps; ++step) {
    est.steps = step;
    Vector y = apply(x);
    const double q = y.squaredNorm();
    if (q == 0.0) {
      // Either M = 0 or the start vector missed the range; retry a few times.
      if (++restarts > 3) {
        est.value = 0.0;
        est.reliable = true;
        return est;
      }
      x = random_unit(rng, dim);
      previous = -1.0;
      continue;
    }
    est.value = std::sqrt(q);
    Vector z = apply(y);
    const double nz = z.norm();
    if (nz == 0.0) {
      est.reliable = true;
      return est;
    }
    x = z / nz;
    if (previous >= 0.0 && std::abs(est.value - previous) <= options.tol * est.value) {
      est.reliable = true;
      return est;
    }
    previous = est.value;
  }
  return est;
}

double max_abs_row_sum(const CsrAdjacency& g) {
  double best = 0.0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    double sum = 0.0;
    for (double w : g.neighbor_weights(s)) sum += std::abs(w);
    best = std::max(best, sum);
  }
  return best;
}

double max_abs_col_sum(const CsrAdjacency& g) {
  std::vector<double> sums(g.num_nodes(), 0.0);
  const auto targets = g.col_targets();
  const auto weights = g.weights();
  for (std::size_t p = 0; p < targets.size(); ++p) sums[targets[p]] += std::abs(weights[p]);
  return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
}

// Smallest positive x with d x^2 + a x = 1.
double quadratic_root(double a, double d) {
  if (d <= 0.0) return a > 0.0 ? 1.0 / a : kInf;
  if (a <= 0.0) return 1.0 / std::sqrt(d);
  return (std::sqrt(a * a + 4.0 * d) - a) / (2.0 * d);
}

double safe_ratio(double x, double h) { return h > 0.0 ? x / h : kInf; }

}  // namespace

SpectralEstimate operator_spectral_radius(const LinearOperator& op, const PowerOptions& options) {
  const Eigen::Index n = op.rows();
  const Eigen::Index k = op.classes();
  return symmetric_radius(
      [&](const Vector& v) { return vectorize(op.apply(devectorize(v, n, k))); }, n * k, options);
}

SpectralEstimate adjacency_spectral_radius(const Graph& g, const PowerOptions& options) {
  const auto offsets = g.row_offsets();
  const auto targets = g.col_targets();
  const auto weights = g.weights();
  return symmetric_radius(
      [&](const Vector& v) {
        Vector out = Vector::Zero(v.size());
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
          double acc = 0.0;
          for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) acc += weights[p] * v[targets[p]];
          out[static_cast<Eigen::Index>(s)] = acc;
        }
        return out;
      },
      static_cast<Eigen::Index>(g.num_nodes()), options);
}

ConvergenceReport convergence_report(const Graph& g, const DegreeVector& d,
                                     const ResidualCoupling& r, Variant variant,
                                     const PowerOptions& options) {
  if (d.size() != g.num_nodes()) throw std::invalid_argument("degree vector does not match graph");
  ConvergenceReport report;
  report.variant = variant;
  report.epsilon = r.epsilon();

  const NormReport h_norms = norms_and_radius(r.base());
  report.rho_coupling = h_norms.spectral_radius;
  report.norm_coupling = h_norms.min_norm;

  const SpectralEstimate rho_a = adjacency_spectral_radius(g, options);
  report.rho_adjacency = rho_a.value;
  report.rho_degree = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());

  double frob_a = 0.0;
  for (double w : g.weights()) frob_a += w * w;
  frob_a = std::sqrt(frob_a);
  const double ind_a = std::min(max_abs_row_sum(g), max_abs_col_sum(g));
  report.norm_adjacency = std::min(frob_a, ind_a);
  double frob_d = 0.0;
  for (double x : d) frob_d += x * x;
  frob_d = std::sqrt(frob_d);
  report.norm_degree = std::min(frob_d, report.rho_degree);

  const double h = report.norm_coupling;
  const double h_ind = std::min(h_norms.induced_one, h_norms.induced_inf);
  if (variant == Variant::linbp_star) {
    report.epsilon_sufficient = safe_ratio(safe_ratio(1.0, report.norm_adjacency), h);
    report.epsilon_spectral_sufficient =
        safe_ratio(safe_ratio(1.0, report.rho_adjacency), report.rho_coupling);
  } else {
    report.epsilon_sufficient =
        safe_ratio(quadratic_root(report.norm_adjacency, report.norm_degree), h);
    report.epsilon_spectral_sufficient = safe_ratio(
        quadratic_root(report.rho_adjacency, report.rho_degree), report.rho_coupling);
  }
  // Lemma 23 assumes |D| <= |A|, which only holds for weights <= 1.
  report.epsilon_simple =
      safe_ratio(safe_ratio(1.0, 2.0 * std::max(ind_a, report.rho_degree)), h_ind);

  auto rho_at = [&](double eps) {
    LinearOperator op(g, d, r.with_epsilon(eps), variant);
    return operator_spectral_radius(op, options);
  };

  const double product = report.rho_coupling * report.rho_adjacency;
  if (product == 0.0) {
    report.epsilon_exact = kInf;
  } else if (variant == Variant::linbp_star) {
    report.epsilon_exact = 1.0 / product;
  } else {
    double lo = 0.0;
    double hi = 10.0 / product;
    auto probe = [&](double eps) {
      auto est = rho_at(eps);
      report.probes.push_back({eps, est.value, est.reliable});
      return est.value < 1.0;
    };
    int expansions = 0;
    while (probe(hi)) {
      lo = hi;
      hi *= 2.0;
      if (++expansions > 60) {
        hi = kInf;
        break;
      }
    }
    if (std::isfinite(hi)) {
      while (hi - lo > 1e-4 * hi) {
        const double mid = 0.5 * (lo + hi);
        (probe(mid) ? lo : hi) = mid;
      }
      report.epsilon_exact = 0.5 * (lo + hi);
    } else {
      report.epsilon_exact = kInf;
    }
  }

  const auto at_current = rho_at(r.epsilon());
  report.rho = at_current.value;
  report.rho_reliable = at_current.reliable && rho_a.reliable;
  report.converges = report.rho < 1.0;

  try {
    const auto bound = mooij_bp_bound(g, uncenter(r), options);
    report.mooij_c = bound.c;
    report.mooij_rho_edge = bound.rho_edge;
    report.mooij_bound_satisfied = bound.satisfied;
  } catch (const DomainError&) {
    // c(H) is undefined when H has zero or negative entries.
  } catch (const std::invalid_argument&) {
  }
  return report;
}

void write_report_text(std::ostream& out, const ConvergenceReport& r) {
  auto num = [](double x) { return text::format_double(x); };
  out << "variant=" << variant_name(r.variant) << '\n'
      << "epsilon=" << num(r.epsilon) << '\n'
      << "rho=" << num(r.rho) << '\n'
      << "rho_reliable=" << (r.rho_reliable ? "true" : "false") << '\n'
      << "converges=" << (r.converges ? "true" : "false") << '\n'
      << "epsilon_exact=" << (std::isfinite(r.epsilon_exact) ? num(r.epsilon_exact) : "unbounded")
      << '\n'
      << "epsilon_sufficient="
      << (std::isfinite(r.epsilon_sufficient) ? num(r.epsilon_sufficient) : "unbounded") << '\n'
      << "epsilon_simple="
      << (std::isfinite(r.epsilon_simple) ? num(r.epsilon_simple) : "unbounded") << '\n'
      << "epsilon_spectral_sufficient="
      << (std::isfinite(r.epsilon_spectral_sufficient) ? num(r.epsilon_spectral_sufficient)
                                                       : "unbounded")
      << '\n'
      << "rho_adjacency=" << num(r.rho_adjacency) << '\n'
      << "rho_degree=" << num(r.rho_degree) << '\n'
      << "rho_coupling=" << num(r.rho_coupling) << '\n'
      << "norm_adjacency=" << num(r.norm_adjacency) << '\n'
      << "norm_degree=" << num(r.norm_degree) << '\n'
      << "norm_coupling=" << num(r.norm_coupling) << '\n';
  if (r.mooij_bound_satisfied) {
    out << "mooij_c=" << num(*r.mooij_c) << '\n'
        << "mooij_rho_edge=" << num(*r.mooij_rho_edge) << '\n'
        << "mooij_bound_satisfied=" << (*r.mooij_bound_satisfied ? "true" : "false") << '\n';
  } else {
    out << "mooij_bound_satisfied=undefined\n";
  }
}

void write_report_csv(std::ostream& out, const ConvergenceReport& r) {
  out << "epsilon,rho,reliable\n";
  for (const auto& p : r.probes) {
    out << text::format_double(p.epsilon) << ',' << text::format_double(p.rho) << ','
        << (p.reliable ? "true" : "false") << '\n';
  }
}

SpectralEstimate edge_matrix_spectral_radius(const Graph& g, const PowerOptions& options) {
  SpectralEstimate est;
  const std::size_t m = g.num_entries();
  if (m == 0) {
    est.reliable = true;
    return est;
  }
  const auto mirror = g.mirror_entries();
  const auto offsets = g.row_offsets();
  // Entry p = (u->v) receives sum over w in N(u), w != v of x[w->u]. With
  // the shift by I every iterate stays positive, so the Collatz-Wielandt
  // ratios bracket the Perron root.
  Vector x = Vector::Ones(static_cast<Eigen::Index>(m));
  Vector y(x.size());
  double previous = -1.0;
  for (int step = 1; step <= options.max_steps; ++step) {
    est.steps = step;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      double incoming = 0.0;
      for (std::size_t p = offsets[u]; p < offsets[u + 1]; ++p) incoming += x[mirror[p]];
      for (std::size_t p = offsets[u]; p < offsets[u + 1]; ++p) {
        y[static_cast<Eigen::Index>(p)] = incoming - x[mirror[p]];
      }
    }
    y += x;
    const Eigen::ArrayXd ratios = y.array() / x.array();
    const double lower = ratios.minCoeff() - 1.0;
    const double upper = ratios.maxCoeff() - 1.0;
    const double growth = y.sum() / x.sum() - 1.0;
    est.value = std::max(0.0, growth);
    x = y / y.maxCoeff();
    if (upper - lower <= options.tol * std::max(1.0, upper)) {
      est.value = std::max(0.0, 0.5 * (lower + upper));
      est.reliable = true;
      return est;
    }
    if (previous >= 0.0 && std::abs(est.value - previous) <= options.tol * std::max(1.0, est.value)) {
      // Reducible matrices keep a ratio gap; the growth rate has settled.
      est.reliable = true;
      return est;
    }
    previous = est.value;
  }
  return est;
}

MooijBound mooij_bp_bound(const Graph& g, const CouplingMatrix& h, const PowerOptions& options) {
  MooijBound bound;
  bound.c = mooij_constant(h);
  const auto est = edge_matrix_spectral_radius(g, options);
  bound.rho_edge = est.value;
  bound.reliable = est.reliable;
  bound.satisfied = bound.c * bound.rho_edge < 1.0;
  return bound;
}

}  // namespace linbp
