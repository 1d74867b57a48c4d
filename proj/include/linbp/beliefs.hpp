#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "linbp/coupling.hpp"
#include "linbp/graph.hpp"

namespace linbp {

enum class BeliefMode {
  normalized,  // rows are probability vectors
  residual,    // rows are deviations from 1/k and sum to zero
};

/// n x k belief matrix tagged with its representation. Row s holds the
/// beliefs of node s; column i the beliefs in class i.
class BeliefMatrix {
 public:
  BeliefMatrix(Matrix values, BeliefMode mode);

  static BeliefMatrix residual_zeros(Eigen::Index n, int k);
  static BeliefMatrix uniform(Eigen::Index n, int k);

  Eigen::Index rows() const noexcept { return values_.rows(); }
  int classes() const noexcept { return static_cast<int>(values_.cols()); }
  BeliefMode mode() const noexcept { return mode_; }
  const Matrix& values() const noexcept { return values_; }

  /// Nodes whose row deviates from the uniform distribution.
  std::vector<bool> explicit_mask() const;
  std::vector<NodeId> explicit_nodes() const;

  BeliefMatrix to_residual() const;
  BeliefMatrix to_normalized() const;

  /// Checks the row-sum invariant of the current mode (and non-negativity
  /// for normalized rows). Returns an empty string when valid.
  std::string check(double tol = 1e-9) const;

 private:
  Matrix values_;
  BeliefMode mode_;
};

/// Belief TSV: `node TAB class TAB value`. In residual mode absent pairs are
/// zero; normalized mode requires complete rows.
BeliefMatrix read_beliefs(std::istream& in, const CsrAdjacency& g, int k, BeliefMode mode);
BeliefMatrix read_beliefs_file(const std::string& path, const CsrAdjacency& g, int k,
                               BeliefMode mode);

/// Writes every nonzero entry (residual) or every entry (normalized).
void write_beliefs(std::ostream& out, const BeliefMatrix& b, const NodeLabels& labels);

}  // namespace linbp
