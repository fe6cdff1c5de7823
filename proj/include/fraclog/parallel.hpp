#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fraclog {

/// Process-wide worker count used by assembly and operator application.
/// 0 or 1 means sequential.
void set_thread_count(int threads);
int thread_count();

/// Runs fn(i) for i in [0, count) over contiguous static chunks. Each index
/// is visited exactly once, so results written to per-index slots do not
/// depend on the number of workers.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, int threads = thread_count()) {
  const std::size_t workers = std::min<std::size_t>(threads > 1 ? static_cast<std::size_t>(threads) : 1, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fraclog
