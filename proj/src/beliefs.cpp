#include "linbp/beliefs.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "linbp/text_io.hpp"

namespace linbp {

BeliefMatrix::BeliefMatrix(Matrix values, BeliefMode mode) : values_(std::move(values)), mode_(mode) {
  if (values_.rows() > 0 && values_.cols() < 1) throw std::invalid_argument("beliefs need k >= 1");
}

BeliefMatrix BeliefMatrix::residual_zeros(Eigen::Index n, int k) {
  return BeliefMatrix(Matrix::Zero(n, k), BeliefMode::residual);
}

BeliefMatrix BeliefMatrix::uniform(Eigen::Index n, int k) {
  return BeliefMatrix(Matrix::Constant(n, k, 1.0 / k), BeliefMode::normalized);
}

std::vector<bool> BeliefMatrix::explicit_mask() const {
  const double center = mode_ == BeliefMode::residual ? 0.0 : 1.0 / classes();
  std::vector<bool> mask(static_cast<std::size_t>(rows()));
  for (Eigen::Index s = 0; s < rows(); ++s) {
    mask[static_cast<std::size_t>(s)] = ((values_.row(s).array() - center) != 0.0).any();
  }
  return mask;
}

std::vector<NodeId> BeliefMatrix::explicit_nodes() const {
  auto mask = explicit_mask();
  std::vector<NodeId> out;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (mask[s]) out.push_back(static_cast<NodeId>(s));
  }
  return out;
}

BeliefMatrix BeliefMatrix::to_residual() const {
  if (mode_ == BeliefMode::residual) return *this;
  return BeliefMatrix((values_.array() - 1.0 / classes()).matrix(), BeliefMode::residual);
}

BeliefMatrix BeliefMatrix::to_normalized() const {
  if (mode_ == BeliefMode::normalized) return *this;
  return BeliefMatrix((values_.array() + 1.0 / classes()).matrix(), BeliefMode::normalized);
}

std::string BeliefMatrix::check(double tol) const {
  const double target = mode_ == BeliefMode::residual ? 0.0 : 1.0;
  for (Eigen::Index s = 0; s < rows(); ++s) {
    double sum = values_.row(s).sum();
    if (std::abs(sum - target) > tol) {
      return "row " + std::to_string(s) + " sums to " + text::format_double(sum);
    }
    if (mode_ == BeliefMode::normalized && (values_.row(s).array() < -tol).any()) {
      return "row " + std::to_string(s) + " has a negative probability";
    }
  }
  return {};
}

BeliefMatrix read_beliefs(std::istream& in, const CsrAdjacency& g, int k, BeliefMode mode) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix values = Matrix::Zero(n, k);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, k, false);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("beliefs line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line);
    if (fields.size() != 3) fail("expected 'node<TAB>class<TAB>value'");
    auto node = g.labels().find(fields[0], g.num_nodes());
    if (!node) fail("unknown node '" + std::string(fields[0]) + "'");
    auto cls = text::parse_int<int>(fields[1]);
    if (!cls || *cls < 0 || *cls >= k) fail("class must be in [0, " + std::to_string(k) + ")");
    auto value = text::parse_double(fields[2]);
    if (!value || !std::isfinite(*value)) fail("bad value '" + std::string(fields[2]) + "'");
    if (seen(*node, *cls)) fail("duplicate entry");
    seen(*node, *cls) = true;
    values(*node, *cls) = *value;
  }
  if (mode == BeliefMode::normalized) {
    for (Eigen::Index s = 0; s < n; ++s) {
      const bool any = seen.row(s).any();
      if (any && !seen.row(s).all()) {
        throw std::runtime_error("normalized beliefs need complete rows (node " +
                                 g.labels().name(static_cast<NodeId>(s)) + ")");
      }
      if (!any) values.row(s).setConstant(1.0 / k);
    }
  }
  return BeliefMatrix(std::move(values), mode);
}

BeliefMatrix read_beliefs_file(const std::string& path, const CsrAdjacency& g, int k,
                               BeliefMode mode) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open beliefs file '" + path + "'");
  return read_beliefs(in, g, k, mode);
}

void write_beliefs(std::ostream& out, const BeliefMatrix& b, const NodeLabels& labels) {
  const bool all = b.mode() == BeliefMode::normalized;
  for (Eigen::Index s = 0; s < b.rows(); ++s) {
    for (int c = 0; c < b.classes(); ++c) {
      double v = b.values()(s, c);
      if (!all && v == 0.0) continue;
      out << labels.name(static_cast<NodeId>(s)) << '\t' << c << '\t' << text::format_double(v)
          << '\n';
    }
  }
}

}  // namespace linbp
