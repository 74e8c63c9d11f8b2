#pragma once

#include <thread>
#include <vector>

namespace nwboost {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

//! Runs compute(0..total-1) on up to `threads` workers and feeds the results
//! to reduce() strictly in index order, so floating-point accumulation is
//! independent of scheduling. Work is issued in index-contiguous batches;
//! at most one batch of results is held in memory.
template <typename Result, typename Compute, typename Reduce>
void ordered_parallel_reduce(int total, int threads, const Compute& compute,
                             const Reduce& reduce) {
  threads = resolve_threads(threads);
  if (threads <= 1 || total <= 1) {
    for (int i = 0; i < total; ++i) reduce(i, compute(i));
    return;
  }
  for (int base = 0; base < total; base += threads) {
    const int batch = std::min(threads, total - base);
    std::vector<Result> results(batch);
    std::vector<std::thread> pool;
    pool.reserve(batch);
    for (int j = 0; j < batch; ++j) {
      pool.emplace_back([&, j] { results[j] = compute(base + j); });
    }
    for (auto& t : pool) t.join();
    for (int j = 0; j < batch; ++j) reduce(base + j, std::move(results[j]));
  }
}

}  // namespace nwboost
