#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/coupling.hpp"
#include "linbp/graph.hpp"

namespace linbp {

struct BpOptions {
  int max_iters = 100;
  /// Stop once every belief changes by less than tol (or by a few ulps of
  /// its own size). Zero runs exactly max_iters iterations.
  double tol = 1e-8;
  unsigned threads = 1;
  /// Called after every iteration with the message buffer (k values per
  /// stored entry, in CSR order) and the current normalized beliefs.
  std::function<void(int iteration, std::span<const double> messages, const Matrix& beliefs)>
      observer;
};

struct BpResult {
  BeliefMatrix beliefs{Matrix(), BeliefMode::normalized};
  /// The same beliefs minus 1/k, computed without rounding through the
  /// probabilities so that tiny deviations keep their relative precision.
  Matrix residual;
  bool converged = false;
  int iterations = 0;
  std::uint64_t edge_visits = 0;
  std::vector<double> change_history;
  /// Nodes in components without any explicit belief; they stay uniform.
  std::vector<bool> unanchored;
};

/// Loopy sum-product BP with a synchronous schedule. Messages start at all
/// ones and are normalized to sum to k; beliefs are normalized to sum to 1.
/// Messages are stored as deviations from 1 and products are evaluated as
/// sums of log1p terms. On weighted graphs an edge of weight w uses the
/// coupling 1/k + w * (H - 1/k). Explicit beliefs may be in either mode.
BpResult bp_run(const Graph& g, const CouplingMatrix& h, const BeliefMatrix& explicit_beliefs,
                const BpOptions& options = {});
/// Same, with H = 1/k + r.scaled(), which avoids rounding H^ through H.
BpResult bp_run(const Graph& g, const ResidualCoupling& r, const BeliefMatrix& explicit_beliefs,
                const BpOptions& options = {});

/// Directed-edge message computations performed by a run.
inline std::uint64_t bp_edge_visit_count(const BpResult& result) { return result.edge_visits; }

}  // namespace linbp
