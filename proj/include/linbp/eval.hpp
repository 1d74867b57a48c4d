#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/coupling.hpp"
#include "linbp/graph.hpp"

namespace linbp {

/// Per node, the sorted classes attaining the maximum belief.
struct TopBeliefAssignment {
  std::vector<std::vector<int>> classes;
  int k = 0;

  std::size_t size() const noexcept { return classes.size(); }
  /// True when every class is tied, as for uniform beliefs.
  bool uninformative(std::size_t node) const {
    return static_cast<int>(classes[node].size()) == k;
  }
};

/// Classes with belief >= max - tie_tol * max(1, |max|). Normalized input
/// is converted to residual form first.
TopBeliefAssignment top_beliefs(const BeliefMatrix& b, double tie_tol = 0.0);

struct QualityOptions {
  /// Skip nodes whose classes are all tied in both assignments.
  bool exclude_uninformative = true;
};

struct QualityReport {
  double recall = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
  std::size_t gt_count = 0;
  std::size_t other_count = 0;
  std::size_t common_count = 0;
  std::size_t nodes = 0;
};

/// Recall and precision over (node, class) pairs; accuracy is their
/// harmonic mean.
QualityReport precision_recall(const TopBeliefAssignment& gt, const TopBeliefAssignment& other,
                               const QualityOptions& options = {});

enum class Method { bp, linbp, linbp_star, sbp };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct SweepOptions {
  std::vector<Method> methods{Method::bp, Method::linbp, Method::linbp_star, Method::sbp};
  Method ground_truth = Method::bp;
  /// Node whose belief spread is reported; defaults to a deepest node.
  std::optional<NodeId> probe;
  double tie_tol = 0.0;
  QualityOptions quality;
  int max_iters = 100;
  /// Absolute tolerance, multiplied by epsilon^tol_power for each row so
  /// that small-epsilon runs are not stopped before deep nodes settle.
  double tol = 1e-8;
  double tol_power = 0.0;
  unsigned threads = 1;
};

struct SweepRow {
  double epsilon = 0.0;
  Method method = Method::bp;
  bool converged = false;
  int iterations = 0;
  std::optional<QualityReport> quality;
  std::optional<double> max_std_dev_from_sbp;
  std::optional<double> sigma_probe;
};

struct SweepSummary {
  Method method;
  std::size_t convergent_rows = 0;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<NodeId> probe;

  std::vector<SweepSummary> summaries() const;
};

/// n log-spaced values from start to stop inclusive.
std::vector<double> log_grid(double start, double stop, int points);

/// Runs each method at every epsilon of the grid and compares it with the
/// ground-truth method. `base` is the unscaled residual coupling and `e` the
/// residual explicit beliefs.
SweepResult epsilon_sweep(const Graph& g, const DegreeVector& d, const ResidualCoupling& base,
                          const BeliefMatrix& e, std::span<const double> grid,
                          const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// `node TAB class[,class...]`.
void write_top_beliefs(std::ostream& out, const TopBeliefAssignment& top, const NodeLabels& labels);

}  // namespace linbp
