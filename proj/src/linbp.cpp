#include "linbp/linbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linbp/parallel.hpp"

namespace linbp {

const char* variant_name(Variant v) { return v == Variant::linbp ? "linbp" : "linbp_star"; }

Variant parse_variant(const std::string& name) {
  if (name == "linbp") return Variant::linbp;
  if (name == "linbp_star" || name == "linbp*") return Variant::linbp_star;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

DivergenceError::DivergenceError(int iteration, std::vector<double> history)
    : std::runtime_error("iteration diverged at step " + std::to_string(iteration)),
      iteration_(iteration),
      history_(std::move(history)) {}

Vector vectorize(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

Matrix devectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("devectorize: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix dense_adjacency(const CsrAdjacency& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : g.entries()) a(e.source, e.target) = e.weight;
  return a;
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(const CsrAdjacency& adjacency, const DegreeVector& degrees,
                               const ResidualCoupling& coupling, Variant variant)
    : LinearOperator(adjacency, degrees, coupling.scaled(),
                     variant == Variant::linbp ? std::optional<Matrix>(residual_square(coupling))
                                               : std::nullopt) {}

LinearOperator::LinearOperator(const CsrAdjacency& adjacency, const DegreeVector& degrees,
                               Matrix propagate, std::optional<Matrix> echo)
    : adjacency_(&adjacency), degrees_(&degrees), propagate_(std::move(propagate)),
      echo_(std::move(echo)) {
  if (propagate_.rows() != propagate_.cols()) throw std::invalid_argument("coupling not square");
  if (echo_ && (echo_->rows() != propagate_.rows() || echo_->cols() != propagate_.cols())) {
    throw std::invalid_argument("echo coupling has the wrong shape");
  }
  if (degrees.size() != adjacency.num_nodes()) {
    throw std::invalid_argument("degree vector does not match the graph");
  }
}

Matrix LinearOperator::apply(const Matrix& x, unsigned threads) const {
  const Eigen::Index n = rows();
  const Eigen::Index k = classes();
  if (x.rows() != n || x.cols() != k) throw std::invalid_argument("operator: dimension mismatch");
  Matrix gathered(n, k);
  const auto offsets = adjacency_->row_offsets();
  const auto targets = adjacency_->col_targets();
  const auto weights = adjacency_->weights();
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      auto row = gathered.row(static_cast<Eigen::Index>(s));
      row.setZero();
      for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) row += weights[p] * x.row(targets[p]);
    }
  });
  Matrix out = gathered * propagate_;
  if (echo_) {
    Eigen::Map<const Vector> d(degrees_->data(), n);
    out.noalias() -= d.asDiagonal() * (x * *echo_);
  }
  return out;
}

Matrix LinearOperator::materialize() const {
  const Matrix a = dense_adjacency(*adjacency_);
  Matrix m = kronecker(propagate_.transpose(), a);
  if (echo_) {
    Eigen::Map<const Vector> d(degrees_->data(), rows());
    Matrix dm = d.asDiagonal();
    m -= kronecker(echo_->transpose(), dm);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Iteration

namespace {

void check_dimensions(const CsrAdjacency& g, const ResidualCoupling& r, const BeliefMatrix& e) {
  if (e.mode() != BeliefMode::residual) throw std::invalid_argument("expected residual beliefs");
  if (e.rows() != static_cast<Eigen::Index>(g.num_nodes()) || e.classes() != r.k()) {
    throw std::invalid_argument("explicit beliefs must be n x k");
  }
}

}  // namespace

BeliefMatrix linbp_step(const CsrAdjacency& g, const DegreeVector& d, const ResidualCoupling& r,
                        const BeliefMatrix& e, const BeliefMatrix& b, Variant variant,
                        unsigned threads) {
  check_dimensions(g, r, e);
  check_dimensions(g, r, b);
  LinearOperator op(g, d, r, variant);
  return BeliefMatrix(e.values() + op.apply(b.values(), threads), BeliefMode::residual);
}

IterationResult iterate_operator(const LinearOperator& op, const BeliefMatrix& e,
                                 const LinbpOptions& options) {
  IterationResult result;
  Matrix b = Matrix::Zero(e.rows(), e.classes());
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    Matrix next = e.values() + op.apply(b, options.threads);
    const double change = next.size() ? (next - b).cwiseAbs().maxCoeff() : 0.0;
    const double magnitude = next.size() ? next.cwiseAbs().maxCoeff() : 0.0;
    result.residual_history.push_back(change);
    result.iterations = iter;
    if (!std::isfinite(magnitude) || magnitude > options.magnitude_cap) {
      throw DivergenceError(iter, std::move(result.residual_history));
    }
    // Entries within a few ulps of their own magnitude count as settled.
    const bool done = options.tol > 0 &&
                      ((next - b).array().abs() <=
                       (64 * std::numeric_limits<double>::epsilon() * next.array().abs().max(b.array().abs()))
                           .max(options.tol))
                          .all();
    b.swap(next);
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.beliefs = BeliefMatrix(std::move(b), BeliefMode::residual);
  return result;
}

IterationResult linbp_iterate(const CsrAdjacency& g, const DegreeVector& d,
                              const ResidualCoupling& r, const BeliefMatrix& e, Variant variant,
                              const LinbpOptions& options) {
  check_dimensions(g, r, e);
  return iterate_operator(LinearOperator(g, d, r, variant), e, options);
}

BeliefMatrix linbp_closed_form(const CsrAdjacency& g, const DegreeVector& d,
                               const ResidualCoupling& r, const BeliefMatrix& e, Variant variant,
                               std::size_t dense_limit) {
  check_dimensions(g, r, e);
  const Eigen::Index n = e.rows();
  const Eigen::Index k = e.classes();
  const auto size = static_cast<std::size_t>(n * k);
  if (size > dense_limit) {
    throw SizeLimitError("closed form needs n*k = " + std::to_string(size) +
                         " <= dense limit " + std::to_string(dense_limit));
  }
  if (size == 0) return BeliefMatrix(Matrix::Zero(n, k), BeliefMode::residual);
  LinearOperator op(g, d, r, variant);
  Matrix system = Matrix::Identity(n * k, n * k) - op.materialize();
  Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    throw SingularSystemError("system matrix is singular (rcond " + std::to_string(rcond) + ")");
  }
  const Vector rhs = vectorize(e.values());
  Vector x = lu.solve(rhs);
  for (int step = 0; step < 2; ++step) {
    Matrix xm = devectorize(x, n, k);
    Vector residual = rhs - vectorize(xm - op.apply(xm));
    x += lu.solve(residual);
  }
  return BeliefMatrix(devectorize(x, n, k), BeliefMode::residual);
}

IterationResult linbp_nonsimplified(const CsrAdjacency& g, const DegreeVector& d,
                                    const ResidualCoupling& r, const BeliefMatrix& e,
                                    const LinbpOptions& options) {
  check_dimensions(g, r, e);
  const Matrix h = r.scaled();
  const auto k = h.rows();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(k, k) - h * h);
  if (!lu.isInvertible()) throw SingularSystemError("I - H^2 is singular");
  Matrix star = lu.solve(h);
  return iterate_operator(LinearOperator(g, d, star, Matrix(h * star)), e, options);
}

Vector binary_closed_form(const CsrAdjacency& g, const DegreeVector& d, double h, const Vector& e,
                          std::size_t dense_limit) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (e.size() != n) throw std::invalid_argument("explicit column must have n entries");
  if (!(std::abs(h) < 0.5)) throw std::invalid_argument("binary closed form needs |h| < 1/2");
  if (static_cast<std::size_t>(n) > dense_limit) throw SizeLimitError("n over dense limit");
  if (n == 0) return Vector();
  const double denom = 1.0 - 4.0 * h * h;
  Eigen::Map<const Vector> dv(d.data(), n);
  Matrix system = Matrix::Identity(n, n) - (2.0 * h / denom) * dense_adjacency(g);
  system.diagonal() += (4.0 * h * h / denom) * dv;
  Eigen::PartialPivLU<Matrix> lu(system);
  if (!(lu.rcond() > 1e-14)) throw SingularSystemError("binary system matrix is singular");
  return lu.solve(e);
}

}  // namespace linbp
