#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mbisac {

/// Runs body(i) for i in [0, count) on up to `threads` workers using a static
/// strided partition. Each index must write only to its own output slot; the
/// caller reduces in index order, so results never depend on the thread count.
template <typename Body>
void parallelFor(std::size_t count, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failureMutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Fixed-order pairwise sum of items[lo, hi). The tree shape depends only on
/// the item count.
template <typename T>
T pairwiseSum(const std::vector<T>& items, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return items[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  T left = pairwiseSum(items, lo, mid);
  left += pairwiseSum(items, mid, hi);
  return left;
}

template <typename T>
T pairwiseSum(const std::vector<T>& items) {
  return pairwiseSum(items, 0, items.size());
}

}  // namespace mbisac
