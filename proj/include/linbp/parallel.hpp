#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace linbp {

/// Runs body(begin, end) over contiguous chunks of [0, n). With threads <= 1
/// the body runs inline, which is the deterministic reference mode.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads <= 1 || n < 2 * threads) {
    body(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    workers.emplace_back([&body, begin, end = std::min(n, begin + chunk)] { body(begin, end); });
  }
}

}  // namespace linbp
