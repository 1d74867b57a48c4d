#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/graph.hpp"

namespace linbp {

/// Symmetric 0/1 Kronecker seed.
class SeedMatrix {
 public:
  explicit SeedMatrix(std::vector<std::vector<int>> rows);
  /// Center node 0 joined to leaves 1 and 2.
  static SeedMatrix star();

  int size() const noexcept { return m_; }
  bool at(int i, int j) const { return cells_[static_cast<std::size_t>(i * m_ + j)] != 0; }
  std::size_t nonzeros() const;
  std::string describe() const;

 private:
  int m_;
  std::vector<std::uint8_t> cells_;
};

/// Same format as a coupling file: m, then m rows of m zeros and ones.
SeedMatrix read_seed(std::istream& in);

struct RngSpec {
  std::string algorithm = "splitmix64";
  std::uint64_t seed = 0;
};

struct KroneckerGraph {
  Graph graph;
  std::uint64_t entries_before_loop_removal = 0;
  std::uint64_t self_loops_removed = 0;
};

/// power-fold Kronecker product of the seed with itself, minus the diagonal.
KroneckerGraph kronecker_power(const SeedMatrix& seed, int power,
                               std::size_t max_nodes = std::size_t{1} << 24);

/// Nodes made explicit for a fraction of n: floor(fraction * n), at least
/// one when fraction > 0.
std::size_t explicit_count(double fraction, std::size_t n);

/// Residual explicit beliefs for a random subset of nodes. The first k - 1
/// classes are drawn from {-0.10, -0.09, ..., 0.10}; the last class is the
/// negated sum. All-zero rows are redrawn.
BeliefMatrix sample_explicit_beliefs(const Graph& g, double fraction, int k, const RngSpec& rng);

/// Like sample_explicit_beliefs, restricted to nodes without explicit
/// beliefs in `current`. Only the sampled rows are nonzero.
BeliefMatrix sample_belief_delta(const Graph& g, const BeliefMatrix& current, double fraction,
                                 const RngSpec& rng);

}  // namespace linbp
