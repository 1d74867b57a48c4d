#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace linbp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultCouplingTolerance = 1e-9;

/// Raised when a quantity is mathematically undefined for its input, e.g. the
/// Mooij constant of a coupling matrix with a zero entry.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-centered k x k coupling matrix H. H(j,i) is the relative influence of
/// class j of a node on class i of its neighbour. Construction only checks
/// shape; use validate() for the stochasticity and symmetry constraints.
class CouplingMatrix {
 public:
  explicit CouplingMatrix(Matrix entries);
  static CouplingMatrix uniform(int k);

  int k() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(int j, int i) const { return entries_(j, i); }

 private:
  Matrix entries_;
};

struct Violation {
  enum class Kind { row_sum, column_sum, asymmetry, out_of_range };
  Kind kind;
  int row;
  int col;  // unused for row_sum; equal to the column index for column_sum
  double value;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string describe() const;
};

ValidationResult validate(const CouplingMatrix& h, double tol = kDefaultCouplingTolerance);

/// Residual coupling H^ = epsilon * H^_o, with every row and column of the
/// unscaled matrix H^_o summing to zero.
class ResidualCoupling {
 public:
  ResidualCoupling(Matrix base, double epsilon = 1.0, double tol = kDefaultCouplingTolerance);

  int k() const noexcept { return static_cast<int>(base_.rows()); }
  const Matrix& base() const noexcept { return base_; }
  double epsilon() const noexcept { return epsilon_; }
  /// The effective matrix epsilon * H^_o.
  Matrix scaled() const { return epsilon_ * base_; }

  ResidualCoupling with_epsilon(double epsilon) const;

 private:
  Matrix base_;
  double epsilon_;
};

/// H^_o(i,j) = H(i,j) - 1/k, epsilon = 1.
ResidualCoupling center(const CouplingMatrix& h);
/// 1/k + epsilon * H^_o.
CouplingMatrix uncenter(const ResidualCoupling& r);

/// (epsilon * H^_o)^2.
Matrix residual_square(const ResidualCoupling& r);

struct NormReport {
  double frobenius = 0;
  double induced_one = 0;  // max absolute column sum
  double induced_inf = 0;  // max absolute row sum
  double min_norm = 0;
  double spectral_radius = 0;
};

/// Frobenius, induced-1 and induced-inf norms plus the spectral radius. The
/// radius uses a symmetric eigensolver when the input is symmetric and a
/// general one otherwise. Throws std::invalid_argument for non-square input.
NormReport norms_and_radius(const Matrix& m);

/// Largest absolute eigenvalue of a small dense matrix.
double dense_spectral_radius(const Matrix& m);

/// c(H) = max over c1 != c2, d1 != d2 of
/// tanh(log(H(c1,d1) H(c2,d2) / (H(c2,d1) H(c1,d2))) / 4).
/// Throws DomainError if any entry is not strictly positive.
double mooij_constant(const CouplingMatrix& h);

/// Coupling file: first line k, then k rows of k whitespace-separated values.
CouplingMatrix read_coupling(std::istream& in);
CouplingMatrix read_coupling_file(const std::string& path);
void write_coupling(std::ostream& out, const CouplingMatrix& h);

}  // namespace linbp
