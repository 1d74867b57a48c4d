#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/coupling.hpp"
#include "linbp/graph.hpp"

namespace linbp {

enum class Variant {
  linbp,       // with the echo-cancellation term
  linbp_star,  // without it
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

inline constexpr std::size_t kDefaultDenseLimit = 3000;

struct LinbpOptions {
  int max_iters = 100;
  /// Same stopping rule as BpOptions::tol.
  double tol = 1e-8;
  /// Iterates whose magnitude exceeds this cap are treated as divergent.
  double magnitude_cap = 1e100;
  unsigned threads = 1;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, std::vector<double> history);
  int iteration() const noexcept { return iteration_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  int iteration_;
  std::vector<double> history_;
};

class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column-stacking vectorization and its inverse.
Vector vectorize(const Matrix& x);
Matrix devectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Dense Kronecker product a (x) b.
Matrix kronecker(const Matrix& a, const Matrix& b);
/// Dense copy of a sparse adjacency (row s holds the entries s->t).
Matrix dense_adjacency(const CsrAdjacency& g);

/// X -> A X P - D X Q on n x k matrices, applied through the sparse rows of
/// A. For LinBP P = H^ and Q = H^^2; for LinBP* there is no Q term. The
/// operator keeps pointers to the adjacency and degree vector, which must
/// outlive it.
class LinearOperator {
 public:
  LinearOperator(const CsrAdjacency& adjacency, const DegreeVector& degrees,
                 const ResidualCoupling& coupling, Variant variant);
  /// General form with explicit right factors; `echo` may be empty.
  LinearOperator(const CsrAdjacency& adjacency, const DegreeVector& degrees, Matrix propagate,
                 std::optional<Matrix> echo);

  Eigen::Index rows() const noexcept { return static_cast<Eigen::Index>(adjacency_->num_nodes()); }
  Eigen::Index classes() const noexcept { return propagate_.rows(); }

  Matrix apply(const Matrix& x, unsigned threads = 1) const;
  /// The nk x nk matrix acting on vec(X): P^T (x) A - Q^T (x) D.
  Matrix materialize() const;

 private:
  const CsrAdjacency* adjacency_;
  const DegreeVector* degrees_;
  Matrix propagate_;
  std::optional<Matrix> echo_;
};

/// E + M(B).
BeliefMatrix linbp_step(const CsrAdjacency& g, const DegreeVector& d, const ResidualCoupling& r,
                        const BeliefMatrix& e, const BeliefMatrix& b, Variant variant,
                        unsigned threads = 1);

struct IterationResult {
  BeliefMatrix beliefs{Matrix(), BeliefMode::residual};
  bool converged = false;
  int iterations = 0;
  /// Largest absolute change of each iteration.
  std::vector<double> residual_history;
};

/// Jacobi iteration from B = 0. Throws DivergenceError when the iterate
/// exceeds the magnitude cap or stops being finite.
IterationResult linbp_iterate(const CsrAdjacency& g, const DegreeVector& d,
                              const ResidualCoupling& r, const BeliefMatrix& e, Variant variant,
                              const LinbpOptions& options = {});

/// Same iteration for an arbitrary operator.
IterationResult iterate_operator(const LinearOperator& op, const BeliefMatrix& e,
                                 const LinbpOptions& options = {});

/// Dense LU solve of (I - M) vec(B) = vec(E), followed by refinement steps
/// against the sparse operator.
BeliefMatrix linbp_closed_form(const CsrAdjacency& g, const DegreeVector& d,
                               const ResidualCoupling& r, const BeliefMatrix& e, Variant variant,
                               std::size_t dense_limit = kDefaultDenseLimit);

/// Iterates B = E + A B H* - D B H^ H* with H* = (I - H^^2)^-1 H^.
IterationResult linbp_nonsimplified(const CsrAdjacency& g, const DegreeVector& d,
                                    const ResidualCoupling& r, const BeliefMatrix& e,
                                    const LinbpOptions& options = {});

/// Two-class closed form for H^ = [[h,-h],[-h,h]]:
/// b = (I - 2h/(1-4h^2) A + 4h^2/(1-4h^2) D)^-1 e.
Vector binary_closed_form(const CsrAdjacency& g, const DegreeVector& d, double h, const Vector& e,
                          std::size_t dense_limit = kDefaultDenseLimit);

// ---------------------------------------------------------------------------
// Convergence analysis

struct PowerOptions {
  double tol = 1e-8;
  int max_steps = 10000;
  std::uint64_t seed = 0x5eed;
};

struct SpectralEstimate {
  double value = 0.0;
  bool reliable = false;
  int steps = 0;
};

/// Spectral radius of a symmetric operator, by power iteration on its
/// square with the Rayleigh quotient as estimate.
SpectralEstimate adjacency_spectral_radius(const Graph& g, const PowerOptions& options = {});
SpectralEstimate operator_spectral_radius(const LinearOperator& op,
                                          const PowerOptions& options = {});

struct EpsilonProbe {
  double epsilon;
  double rho;
  bool reliable;
};

struct ConvergenceReport {
  Variant variant = Variant::linbp;
  /// Radius of the update operator at the epsilon of the input coupling.
  double epsilon = 1.0;
  double rho = 0.0;
  bool converges = true;
  bool rho_reliable = true;
  double epsilon_exact = 0.0;
  double epsilon_sufficient = 0.0;
  double epsilon_simple = 0.0;
  /// Sufficient threshold from the exact radii of A, D and H^_o.
  double epsilon_spectral_sufficient = 0.0;
  double rho_adjacency = 0.0;
  double rho_degree = 0.0;
  double rho_coupling = 0.0;
  double norm_adjacency = 0.0;
  double norm_degree = 0.0;
  double norm_coupling = 0.0;
  std::optional<bool> mooij_bound_satisfied;
  std::optional<double> mooij_c;
  std::optional<double> mooij_rho_edge;
  std::vector<EpsilonProbe> probes;
};

ConvergenceReport convergence_report(const Graph& g, const DegreeVector& d,
                                     const ResidualCoupling& r, Variant variant,
                                     const PowerOptions& options = {});

void write_report_text(std::ostream& out, const ConvergenceReport& report);
void write_report_csv(std::ostream& out, const ConvergenceReport& report);

struct MooijBound {
  double c = 0.0;
  double rho_edge = 0.0;
  bool satisfied = true;
  bool reliable = true;
};

/// Radius of the directed-edge matrix, where u->v feeds from every w->u
/// with w != v.
SpectralEstimate edge_matrix_spectral_radius(const Graph& g, const PowerOptions& options = {});
MooijBound mooij_bp_bound(const Graph& g, const CouplingMatrix& h,
                          const PowerOptions& options = {});

}  // namespace linbp
