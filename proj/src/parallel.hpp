#pragma once

// Fixed-block parallel loops. Work is split into blocks whose boundaries do
// not depend on the thread count, so per-block results (and any reduction
// over them in block order) are identical for every --threads value.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sqapprox::detail {

template <class Fn>
void for_each_block(std::size_t n_blocks, unsigned threads, Fn&& fn) {
  threads = std::max(1U, threads);
  if (threads == 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));
  pool.reserve(used);
  for (unsigned t = 0; t < used; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t b = next++; b < n_blocks; b = next++) fn(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise tree sum in index order.
inline double tree_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 0) return 0.0;
  if (hi - lo == 1) return v[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

inline double tree_sum(const std::vector<double>& v) { return tree_sum(v, 0, v.size()); }

}  // namespace sqapprox::detail
