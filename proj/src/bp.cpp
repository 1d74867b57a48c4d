#include "linbp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "linbp/parallel.hpp"

namespace linbp {

namespace {

// An entry has settled when its change is below tol or within a few dozen
// ulps of its own magnitude.
constexpr double kRoundingFloor = 64 * std::numeric_limits<double>::epsilon();

bool settled(const Matrix& next, const Matrix& prev, double tol) {
  return ((next - prev).array().abs() <=
          (kRoundingFloor * next.array().abs().max(prev.array().abs())).max(tol))
      .all();
}

std::vector<bool> unanchored_nodes(const Graph& g, const std::vector<bool>& is_explicit) {
  std::vector<bool> reached(is_explicit);
  std::deque<NodeId> queue;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (is_explicit[v]) queue.push_back(v);
  }
  while (!queue.empty()) {
    NodeId s = queue.front();
    queue.pop_front();
    for (NodeId t : g.neighbors(s)) {
      if (!reached[t]) {
        reached[t] = true;
        queue.push_back(t);
      }
    }
  }
  reached.flip();
  return reached;
}

// Every factor is 1 + x with x >= -1; x == -1 is an exact zero.
inline bool zero_factor(double x) { return x <= -1.0; }

// Log of e_s(j) * prod_u m_us(j) up to the constant -log k, split into the
// sum of logs of the nonzero factors and the number of zero factors.
struct LogProducts {
  Matrix log_sum;
  Eigen::MatrixXi zeros;
};

void accumulate_products(const Graph& g, const Matrix& scaled_explicit,
                         const std::vector<double>& mu, const std::vector<std::size_t>& rev,
                         int k, unsigned threads, LogProducts& out) {
  const auto offsets = g.row_offsets();
  parallel_for(g.num_nodes(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      for (int j = 0; j < k; ++j) {
        const double x = scaled_explicit(row, j);
        out.zeros(row, j) = zero_factor(x) ? 1 : 0;
        out.log_sum(row, j) = zero_factor(x) ? 0.0 : std::log1p(x);
      }
      for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) {
        const double* incoming = &mu[rev[p] * static_cast<std::size_t>(k)];
        for (int j = 0; j < k; ++j) {
          if (zero_factor(incoming[j])) {
            ++out.zeros(row, j);
          } else {
            out.log_sum(row, j) += std::log1p(incoming[j]);
          }
        }
      }
    }
  });
}

// Writes p - 1/k for p proportional to exp(log_value) (zero where `zero` is
// set). Returns false when every entry is zero.
template <class LogAt, class ZeroAt>
bool centered_distribution(int k, LogAt log_value, ZeroAt zero, double* delta) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    if (!zero(j)) peak = std::max(peak, log_value(j));
  }
  if (!std::isfinite(peak)) return false;
  // exp(L_j - peak) = 1 + z_j; the residual is (z_j - mean z) / (k (1 + mean z)).
  double z_mean = 0.0;
  for (int j = 0; j < k; ++j) {
    delta[j] = zero(j) ? -1.0 : std::expm1(log_value(j) - peak);
    z_mean += delta[j];
  }
  z_mean /= k;
  const double scale = 1.0 / (k * (1.0 + z_mean));
  for (int j = 0; j < k; ++j) delta[j] = (delta[j] - z_mean) * scale;
  return true;
}

BpResult run(const Graph& g, const Matrix& coupling_residual,
             const BeliefMatrix& explicit_beliefs, const BpOptions& options) {
  const int k = static_cast<int>(coupling_residual.rows());
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (explicit_beliefs.rows() != n || explicit_beliefs.classes() != k) {
    throw std::invalid_argument("explicit beliefs must be n x k");
  }
  if (auto problem = explicit_beliefs.check(); !problem.empty()) {
    throw std::invalid_argument("explicit beliefs: " + problem);
  }

  const double uniform = 1.0 / k;
  double max_weight = 0.0;
  for (double w : g.weights()) max_weight = std::max(max_weight, w);
  if (max_weight > 0.0 && (uniform + max_weight * coupling_residual.array()).minCoeff() < 0.0) {
    throw DomainError("edge weights push the coupling matrix below zero");
  }

  // k * (e_s - 1/k), so that e_s(j) = (1 + x) / k.
  Matrix scaled_explicit = explicit_beliefs.mode() == BeliefMode::residual
                               ? Matrix(k * explicit_beliefs.values())
                               : Matrix((k * explicit_beliefs.values()).array() - 1.0);
  if (n > 0 && scaled_explicit.minCoeff() < -1.0 - 1e-9) {
    throw std::invalid_argument("explicit beliefs imply negative probabilities");
  }
  scaled_explicit = scaled_explicit.cwiseMax(-1.0);

  const std::size_t kk = static_cast<std::size_t>(k);
  const auto rev = g.mirror_entries();
  const auto offsets = g.row_offsets();
  const Matrix coupling_t = coupling_residual.transpose();

  // m_st = 1 + mu_st.
  std::vector<double> mu(g.num_entries() * kk, 0.0);
  std::vector<double> next(mu.size());
  LogProducts products{Matrix(n, k), Eigen::MatrixXi(n, k)};
  Matrix residual = scaled_explicit / k;
  Matrix next_residual(n, k);
  std::vector<double> observed_messages;
  Matrix observed_beliefs;

  BpResult result;
  result.unanchored = unanchored_nodes(g, explicit_beliefs.explicit_mask());

  accumulate_products(g, scaled_explicit, mu, rev, k, options.threads, products);

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    // Eq. 3: m_st(i) = 1/Z sum_j H(j,i) e_s(j) prod_{u != t} m_us(j).
    parallel_for(g.num_nodes(), options.threads, [&](std::size_t begin, std::size_t end) {
      Vector delta(k);
      Vector mixed(k);
      for (std::size_t s = begin; s < end; ++s) {
        const auto row = static_cast<Eigen::Index>(s);
        const auto ws = g.neighbor_weights(static_cast<NodeId>(s));
        for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) {
          const double* back = &mu[rev[p] * kk];
          double* out = &next[p * kk];
          const bool any = centered_distribution(
              k,
              [&](int j) {
                return products.log_sum(row, j) - (zero_factor(back[j]) ? 0.0 : std::log1p(back[j]));
              },
              [&](int j) { return products.zeros(row, j) - (zero_factor(back[j]) ? 1 : 0) > 0; },
              delta.data());
          if (!any) {
            std::fill(out, out + k, 0.0);
            continue;
          }
          // With H = 1/k + w H^ and a residual distribution delta, the
          // message is 1 + k w H^T delta.
          mixed.noalias() = coupling_t * delta;
          mixed *= k * ws[p - offsets[s]];
          mixed.array() -= mixed.mean();
          for (int i = 0; i < k; ++i) out[i] = std::max(mixed[i], -1.0);
        }
      }
    });
    mu.swap(next);

    // Eq. 1 with the fresh messages.
    accumulate_products(g, scaled_explicit, mu, rev, k, options.threads, products);
    parallel_for(g.num_nodes(), options.threads, [&](std::size_t begin, std::size_t end) {
      Vector delta(k);
      for (std::size_t s = begin; s < end; ++s) {
        const auto row = static_cast<Eigen::Index>(s);
        const bool any = centered_distribution(
            k, [&](int j) { return products.log_sum(row, j); },
            [&](int j) { return products.zeros(row, j) > 0; }, delta.data());
        if (any) {
          next_residual.row(row) = delta.transpose();
        } else {
          next_residual.row(row).setZero();
        }
      }
    });

    const double change = n > 0 ? (next_residual - residual).cwiseAbs().maxCoeff() : 0.0;
    const bool done = options.tol > 0 && settled(next_residual, residual, options.tol);
    residual.swap(next_residual);
    result.iterations = iter;
    result.edge_visits += g.num_entries();
    result.change_history.push_back(change);
    if (options.observer) {
      observed_messages.resize(mu.size());
      for (std::size_t i = 0; i < mu.size(); ++i) observed_messages[i] = 1.0 + mu[i];
      observed_beliefs = residual.array() + uniform;
      options.observer(iter, observed_messages, observed_beliefs);
    }
    if (done || !std::isfinite(change)) {
      result.converged = std::isfinite(change);
      break;
    }
  }

  result.beliefs = BeliefMatrix(residual.array() + uniform, BeliefMode::normalized);
  result.residual = std::move(residual);
  return result;
}

}  // namespace

BpResult bp_run(const Graph& g, const CouplingMatrix& h, const BeliefMatrix& explicit_beliefs,
                const BpOptions& options) {
  return run(g, h.entries().array() - 1.0 / h.k(), explicit_beliefs, options);
}

BpResult bp_run(const Graph& g, const ResidualCoupling& r, const BeliefMatrix& explicit_beliefs,
                const BpOptions& options) {
  return run(g, r.scaled(), explicit_beliefs, options);
}

}  // namespace linbp
