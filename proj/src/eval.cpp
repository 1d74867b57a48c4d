#include "linbp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "linbp/bp.hpp"
#include "linbp/linbp.hpp"
#include "linbp/sbp.hpp"
#include "linbp/text_io.hpp"

namespace linbp {

TopBeliefAssignment top_beliefs(const BeliefMatrix& b, double tie_tol) {
  const BeliefMatrix residual = b.to_residual();
  const Matrix& v = residual.values();
  TopBeliefAssignment out;
  out.k = residual.classes();
  out.classes.resize(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index s = 0; s < v.rows(); ++s) {
    const double best = v.row(s).maxCoeff();
    const double cutoff = best - tie_tol * std::max(1.0, std::abs(best));
    auto& set = out.classes[static_cast<std::size_t>(s)];
    for (int c = 0; c < out.k; ++c) {
      if (v(s, c) >= cutoff) set.push_back(c);
    }
  }
  return out;
}

QualityReport precision_recall(const TopBeliefAssignment& gt, const TopBeliefAssignment& other,
                               const QualityOptions& options) {
  if (gt.size() != other.size() || gt.k != other.k) {
    throw std::invalid_argument("assignments cover different nodes or classes");
  }
  QualityReport q;
  for (std::size_t s = 0; s < gt.size(); ++s) {
    if (options.exclude_uninformative && gt.uninformative(s) && other.uninformative(s)) continue;
    ++q.nodes;
    const auto& a = gt.classes[s];
    const auto& b = other.classes[s];
    q.gt_count += a.size();
    q.other_count += b.size();
    std::vector<int> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    q.common_count += common.size();
  }
  q.recall = q.gt_count ? static_cast<double>(q.common_count) / static_cast<double>(q.gt_count) : 0;
  q.precision =
      q.other_count ? static_cast<double>(q.common_count) / static_cast<double>(q.other_count) : 0;
  const double sum = q.recall + q.precision;
  q.accuracy = sum > 0 ? 2 * q.recall * q.precision / sum : 0.0;
  return q;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::bp: return "bp";
    case Method::linbp: return "linbp";
    case Method::linbp_star: return "linbp_star";
    case Method::sbp: return "sbp";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::bp, Method::linbp, Method::linbp_star, Method::sbp}) {
    if (name == method_name(m)) return m;
  }
  if (name == "linbp*") return Method::linbp_star;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::vector<SweepSummary> SweepResult::summaries() const {
  std::vector<SweepSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SweepSummary& s) { return s.method == row.method; });
    if (it == out.end()) {
      out.push_back({row.method, 0, 0.0, 1.0});
      it = out.end() - 1;
    }
    if (!row.quality) continue;
    ++it->convergent_rows;
    it->mean_accuracy += row.quality->accuracy;
    it->min_accuracy = std::min(it->min_accuracy, row.quality->accuracy);
  }
  for (auto& s : out) {
    if (s.convergent_rows) {
      s.mean_accuracy /= static_cast<double>(s.convergent_rows);
    } else {
      s.min_accuracy = 0.0;
    }
  }
  return out;
}

std::vector<double> log_grid(double start, double stop, int points) {
  if (points < 1 || !(start > 0) || !(stop > 0)) {
    throw std::invalid_argument("log grid needs positive bounds and at least one point");
  }
  std::vector<double> grid;
  if (points == 1) return {start};
  const double a = std::log(start);
  const double b = std::log(stop);
  for (int i = 0; i < points; ++i) {
    double x = i == 0 ? start : i == points - 1 ? stop : std::exp(a + (b - a) * i / (points - 1));
    grid.push_back(x);
  }
  return grid;
}

namespace {

struct MethodOutcome {
  bool converged = false;
  int iterations = 0;
  Matrix residual;
};

MethodOutcome run_method(Method m, const Graph& g, const DegreeVector& d,
                         const ResidualCoupling& r, const BeliefMatrix& e, const SbpState& sbp,
                         const SweepOptions& options, double tol) {
  MethodOutcome out;
  switch (m) {
    case Method::bp: {
      try {
        BpOptions bo;
        bo.max_iters = options.max_iters;
        bo.tol = tol;
        bo.threads = options.threads;
        auto result = bp_run(g, r, e, bo);
        out.converged = result.converged;
        out.iterations = result.iterations;
        out.residual = std::move(result.residual);
      } catch (const DomainError&) {
      }
      break;
    }
    case Method::linbp:
    case Method::linbp_star: {
      LinbpOptions lo;
      lo.max_iters = options.max_iters;
      lo.tol = tol;
      lo.threads = options.threads;
      try {
        auto result = linbp_iterate(
            g, d, r, e, m == Method::linbp ? Variant::linbp : Variant::linbp_star, lo);
        out.converged = result.converged;
        out.iterations = result.iterations;
        out.residual = result.beliefs.values();
      } catch (const DivergenceError& err) {
        out.iterations = err.iteration();
      }
      break;
    }
    case Method::sbp:
      out.converged = true;
      out.iterations = static_cast<int>(sbp.geodesics.levels.size());
      out.residual = sbp.beliefs;
      break;
  }
  return out;
}

double max_standardized_gap(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index s = 0; s < a.rows(); ++s) {
    const Vector za = standardize(a.row(s).transpose());
    const Vector zb = standardize(b.row(s).transpose());
    worst = std::max(worst, (za - zb).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::optional<NodeId> default_probe(const SbpState& sbp) {
  const auto& levels = sbp.geodesics.levels;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    if (!it->empty()) return it->front();
  }
  return std::nullopt;
}

}  // namespace

SweepResult epsilon_sweep(const Graph& g, const DegreeVector& d, const ResidualCoupling& base,
                          const BeliefMatrix& e, std::span<const double> grid,
                          const SweepOptions& options) {
  if (e.mode() != BeliefMode::residual) throw std::invalid_argument("sweep expects residual beliefs");
  for (double eps : grid) {
    if (!(eps > 0)) throw std::invalid_argument("epsilon grid values must be positive");
  }
  const SbpState sbp = sbp_run(g, base, e);
  SweepResult result;
  result.probe = options.probe ? options.probe : default_probe(sbp);
  if (result.probe && *result.probe >= g.num_nodes()) throw std::out_of_range("probe node");

  for (double eps : grid) {
    const ResidualCoupling r = base.with_epsilon(eps);
    const double tol = options.tol * std::pow(eps, options.tol_power);
    std::map<Method, MethodOutcome> outcomes;
    auto outcome = [&](Method m) -> const MethodOutcome& {
      auto it = outcomes.find(m);
      if (it == outcomes.end()) {
        it = outcomes.emplace(m, run_method(m, g, d, r, e, sbp, options, tol)).first;
      }
      return it->second;
    };
    const MethodOutcome& gt = outcome(options.ground_truth);
    std::optional<TopBeliefAssignment> gt_top;
    if (gt.converged) gt_top = top_beliefs(BeliefMatrix(gt.residual, BeliefMode::residual), options.tie_tol);

    for (Method m : options.methods) {
      const MethodOutcome& o = outcome(m);
      SweepRow row;
      row.epsilon = eps;
      row.method = m;
      row.converged = o.converged;
      row.iterations = o.iterations;
      if (o.converged) {
        const BeliefMatrix beliefs(o.residual, BeliefMode::residual);
        if (gt_top) row.quality = precision_recall(*gt_top, top_beliefs(beliefs, options.tie_tol),
                                                   options.quality);
        row.max_std_dev_from_sbp = max_standardized_gap(o.residual, sbp.beliefs);
        if (result.probe) {
          row.sigma_probe = population_sd(o.residual.row(*result.probe).transpose());
        }
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  auto opt = [](const std::optional<double>& v) {
    return v ? text::format_double(*v) : std::string();
  };
  out << "epsilon,method,converged,iters,recall,precision,accuracy,max_std_dev_from_sbp,"
         "sigma_probe\n";
  for (const auto& row : result.rows) {
    out << text::format_double(row.epsilon) << ',' << method_name(row.method) << ','
        << (row.converged ? "true" : "false") << ',' << row.iterations << ',';
    if (row.quality) {
      out << text::format_double(row.quality->recall) << ','
          << text::format_double(row.quality->precision) << ','
          << text::format_double(row.quality->accuracy);
    } else {
      out << ",,";
    }
    out << ',' << opt(row.max_std_dev_from_sbp) << ',' << opt(row.sigma_probe) << '\n';
  }
}

void write_top_beliefs(std::ostream& out, const TopBeliefAssignment& top, const NodeLabels& labels) {
  for (std::size_t s = 0; s < top.size(); ++s) {
    out << labels.name(static_cast<NodeId>(s)) << '\t';
    for (std::size_t i = 0; i < top.classes[s].size(); ++i) {
      if (i) out << ',';
      out << top.classes[s][i];
    }
    out << '\n';
  }
}

}  // namespace linbp
