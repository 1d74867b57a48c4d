#include "linbp/coupling.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "linbp/text_io.hpp"

namespace linbp {

CouplingMatrix::CouplingMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw std::invalid_argument("coupling matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) throw std::invalid_argument("coupling matrix has non-finite entries");
}

CouplingMatrix CouplingMatrix::uniform(int k) {
  return CouplingMatrix(Matrix::Constant(k, k, 1.0 / k));
}

std::string ValidationResult::describe() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) {
    switch (v.kind) {
      case Violation::Kind::row_sum:
        os << "row " << v.row << " sums to " << v.value << "; ";
        break;
      case Violation::Kind::column_sum:
        os << "column " << v.col << " sums to " << v.value << "; ";
        break;
      case Violation::Kind::asymmetry:
        os << "asymmetric at (" << v.row << ',' << v.col << "), difference " << v.value << "; ";
        break;
      case Violation::Kind::out_of_range:
        os << "entry (" << v.row << ',' << v.col << ") = " << v.value << " outside [0,1]; ";
        break;
    }
  }
  auto s = os.str();
  s.resize(s.size() - 2);
  return s;
}

ValidationResult validate(const CouplingMatrix& h, double tol) {
  const auto& m = h.entries();
  const int k = h.k();
  ValidationResult result;
  for (int i = 0; i < k; ++i) {
    double row = m.row(i).sum();
    if (std::abs(row - 1.0) > tol) result.violations.push_back({Violation::Kind::row_sum, i, -1, row});
  }
  for (int j = 0; j < k; ++j) {
    double col = m.col(j).sum();
    if (std::abs(col - 1.0) > tol) {
      result.violations.push_back({Violation::Kind::column_sum, -1, j, col});
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      double diff = m(i, j) - m(j, i);
      if (std::abs(diff) > tol) result.violations.push_back({Violation::Kind::asymmetry, i, j, diff});
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (m(i, j) < -tol || m(i, j) > 1.0 + tol) {
        result.violations.push_back({Violation::Kind::out_of_range, i, j, m(i, j)});
      }
    }
  }
  return result;
}

ResidualCoupling::ResidualCoupling(Matrix base, double epsilon, double tol)
    : base_(std::move(base)), epsilon_(epsilon) {
  if (base_.rows() != base_.cols() || base_.rows() < 1) {
    throw std::invalid_argument("residual coupling must be square and non-empty");
  }
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw std::invalid_argument("epsilon_H must be positive and finite");
  }
  for (Eigen::Index i = 0; i < base_.rows(); ++i) {
    if (std::abs(base_.row(i).sum()) > tol || std::abs(base_.col(i).sum()) > tol) {
      throw std::invalid_argument("residual coupling rows and columns must sum to zero");
    }
  }
  if ((base_ - base_.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("residual coupling must be symmetric");
  }
}

ResidualCoupling ResidualCoupling::with_epsilon(double epsilon) const {
  return ResidualCoupling(base_, epsilon);
}

ResidualCoupling center(const CouplingMatrix& h) {
  const int k = h.k();
  return ResidualCoupling(h.entries().array() - 1.0 / k, 1.0,
                          std::max(kDefaultCouplingTolerance, 1e-12 * k));
}

CouplingMatrix uncenter(const ResidualCoupling& r) {
  return CouplingMatrix((r.scaled().array() + 1.0 / r.k()).matrix());
}

Matrix residual_square(const ResidualCoupling& r) {
  Matrix scaled = r.scaled();
  return scaled * scaled;
}

double dense_spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("spectral radius needs a square matrix");
  if (m.rows() == 0) return 0.0;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

NormReport norms_and_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("norms_and_radius needs a square matrix");
  NormReport r;
  if (m.rows() == 0) return r;
  r.frobenius = m.norm();
  r.induced_one = m.cwiseAbs().colwise().sum().maxCoeff();
  r.induced_inf = m.cwiseAbs().rowwise().sum().maxCoeff();
  r.min_norm = std::min({r.frobenius, r.induced_one, r.induced_inf});
  r.spectral_radius = dense_spectral_radius(m);
  return r;
}

double mooij_constant(const CouplingMatrix& h) {
  const auto& m = h.entries();
  if ((m.array() <= 0.0).any()) {
    throw DomainError("Mooij constant c(H) is undefined for coupling matrices with zero entries");
  }
  const int k = h.k();
  double best = 0.0;
  for (int c1 = 0; c1 < k; ++c1) {
    for (int c2 = 0; c2 < k; ++c2) {
      if (c1 == c2) continue;
      for (int d1 = 0; d1 < k; ++d1) {
        for (int d2 = 0; d2 < k; ++d2) {
          if (d1 == d2) continue;
          double cross = (m(c1, d1) * m(c2, d2)) / (m(c2, d1) * m(c1, d2));
          best = std::max(best, std::tanh(0.25 * std::log(cross)));
        }
      }
    }
  }
  return best;
}

CouplingMatrix read_coupling(std::istream& in) {
  std::vector<double> values;
  std::string token;
  std::string line;
  long k = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    std::istringstream fields{std::string(text::trim(line))};
    while (fields >> token) {
      if (k < 0) {
        auto parsed = text::parse_int<long>(token);
        if (!parsed || *parsed < 1) {
          throw std::runtime_error("coupling file line " + std::to_string(line_no) +
                                   ": expected class count k >= 1");
        }
        k = *parsed;
        continue;
      }
      auto v = text::parse_double(token);
      if (!v) {
        throw std::runtime_error("coupling file line " + std::to_string(line_no) +
                                 ": bad number '" + token + "'");
      }
      values.push_back(*v);
    }
  }
  if (k < 0) throw std::runtime_error("coupling file is empty");
  if (values.size() != static_cast<std::size_t>(k * k)) {
    throw std::runtime_error("coupling file: expected " + std::to_string(k * k) + " entries, got " +
                             std::to_string(values.size()));
  }
  Matrix m(k, k);
  for (long i = 0; i < k; ++i) {
    for (long j = 0; j < k; ++j) m(i, j) = values[static_cast<std::size_t>(i * k + j)];
  }
  return CouplingMatrix(std::move(m));
}

CouplingMatrix read_coupling_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coupling file '" + path + "'");
  return read_coupling(in);
}

void write_coupling(std::ostream& out, const CouplingMatrix& h) {
  out << h.k() << '\n';
  for (int i = 0; i < h.k(); ++i) {
    for (int j = 0; j < h.k(); ++j) {
      if (j) out << ' ';
      out << text::format_double(h(i, j));
    }
    out << '\n';
  }
}

}  // namespace linbp
