#include "linbp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "linbp/rng.hpp"

namespace linbp {

SeedMatrix::SeedMatrix(std::vector<std::vector<int>> rows) : m_(static_cast<int>(rows.size())) {
  if (m_ < 2) throw std::invalid_argument("seed matrix needs m >= 2");
  cells_.reserve(static_cast<std::size_t>(m_ * m_));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m_) throw std::invalid_argument("seed matrix not square");
    for (int v : row) {
      if (v != 0 && v != 1) throw std::invalid_argument("seed entries must be 0 or 1");
      cells_.push_back(static_cast<std::uint8_t>(v));
    }
  }
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < i; ++j) {
      if (at(i, j) != at(j, i)) throw std::invalid_argument("seed matrix not symmetric");
    }
  }
}

SeedMatrix SeedMatrix::star() { return SeedMatrix({{0, 1, 1}, {1, 0, 0}, {1, 0, 0}}); }

std::size_t SeedMatrix::nonzeros() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

std::string SeedMatrix::describe() const {
  std::ostringstream out;
  for (int i = 0; i < m_; ++i) {
    if (i) out << ';';
    for (int j = 0; j < m_; ++j) out << (at(i, j) ? '1' : '0');
  }
  return out.str();
}

SeedMatrix read_seed(std::istream& in) {
  int m = 0;
  if (!(in >> m) || m < 2) throw std::runtime_error("seed file: expected size m >= 2");
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(m), std::vector<int>(m));
  for (auto& row : rows) {
    for (int& v : row) {
      if (!(in >> v)) throw std::runtime_error("seed file: expected m x m entries");
    }
  }
  return SeedMatrix(std::move(rows));
}

KroneckerGraph kronecker_power(const SeedMatrix& seed, int power, std::size_t max_nodes) {
  if (power < 1) throw std::invalid_argument("Kronecker power must be >= 1");
  const auto m = static_cast<std::uint64_t>(seed.size());
  std::uint64_t n = 1;
  for (int i = 0; i < power; ++i) {
    if (n > max_nodes / m) throw std::overflow_error("Kronecker graph exceeds the node limit");
    n *= m;
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> base;
  for (int i = 0; i < seed.size(); ++i) {
    for (int j = 0; j < seed.size(); ++j) {
      if (seed.at(i, j)) base.emplace_back(i, j);
    }
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cells{{0, 0}};
  for (int level = 0; level < power; ++level) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> next;
    next.reserve(cells.size() * base.size());
    for (auto [i, j] : cells) {
      for (auto [a, b] : base) next.emplace_back(i * m + a, j * m + b);
    }
    cells = std::move(next);
  }
  KroneckerGraph out;
  out.entries_before_loop_removal = cells.size();
  std::vector<Edge> entries;
  entries.reserve(cells.size());
  for (auto [i, j] : cells) {
    if (i == j) {
      ++out.self_loops_removed;
    } else {
      entries.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), 1.0});
    }
  }
  out.graph = Graph::from_entries(n, std::move(entries));
  return out;
}

std::size_t explicit_count(double fraction, std::size_t n) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in [0, 1]");
  if (fraction == 0.0 || n == 0) return 0;
  auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(count, 1, n);
}

namespace {

Matrix draw_rows(SplitMix64& rng, const std::vector<NodeId>& nodes, Eigen::Index n, int k) {
  if (k < 2) throw std::invalid_argument("belief sampling needs k >= 2");
  Matrix values = Matrix::Zero(n, k);
  for (NodeId v : nodes) {
    bool nonzero = false;
    while (!nonzero) {
      double sum = 0.0;
      for (int c = 0; c + 1 < k; ++c) {
        const auto hundredths = static_cast<int>(rng.below(21)) - 10;
        values(v, c) = hundredths / 100.0;
        sum += values(v, c);
        nonzero = nonzero || hundredths != 0;
      }
      values(v, k - 1) = -sum;
    }
  }
  return values;
}

std::vector<NodeId> choose(SplitMix64& rng, std::vector<NodeId> pool, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void check_rng(const RngSpec& spec) {
  if (spec.algorithm != SplitMix64::kName) {
    throw std::invalid_argument("unsupported rng algorithm '" + spec.algorithm + "'");
  }
}

}  // namespace

BeliefMatrix sample_explicit_beliefs(const Graph& g, double fraction, int k, const RngSpec& spec) {
  check_rng(spec);
  const std::size_t n = g.num_nodes();
  const std::size_t count = explicit_count(fraction, n);
  SplitMix64 rng(spec.seed);
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  auto nodes = choose(rng, std::move(pool), count);
  return BeliefMatrix(draw_rows(rng, nodes, static_cast<Eigen::Index>(n), k), BeliefMode::residual);
}

BeliefMatrix sample_belief_delta(const Graph& g, const BeliefMatrix& current, double fraction,
                                 const RngSpec& spec) {
  check_rng(spec);
  const std::size_t n = g.num_nodes();
  if (current.rows() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("current beliefs do not match the graph");
  }
  const auto mask = current.explicit_mask();
  std::vector<NodeId> pool;
  for (NodeId v = 0; v < n; ++v) {
    if (!mask[v]) pool.push_back(v);
  }
  const std::size_t count = std::min(explicit_count(fraction, n), pool.size());
  SplitMix64 rng(spec.seed);
  auto nodes = choose(rng, std::move(pool), count);
  return BeliefMatrix(draw_rows(rng, nodes, static_cast<Eigen::Index>(n), current.classes()),
                      BeliefMode::residual);
}

}  // namespace linbp
