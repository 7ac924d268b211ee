#pragma once

// Minimal row-parallel helper. Work is split into contiguous chunks with
// disjoint writes, so results are identical for any thread count; reductions
// elsewhere stay serial in index order.

#include <algorithm>
#include <thread>
#include <vector>

namespace rnls {

inline int& thread_count() {
  static int n = 1;
  return n;
}

inline void set_threads(int n) { thread_count() = std::max(1, n); }

template <class F>
inline void parallel_for(int begin, int end, F&& f) {
  const int n = end - begin;
  const int workers = std::min(thread_count(), n);
  if (workers <= 1 || n < 64) {
    for (int i = begin; i < end; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f]() {
      for (int i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace rnls
