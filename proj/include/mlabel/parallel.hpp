#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace mlabel {

// Runs body(i) for i in [begin,end) on up to `threads` workers. Callers must
// only write to disjoint slots indexed by i; there are no shared reductions,
// so results are identical for any thread count.
template <typename Body>
void parallel_for(int begin, int end, int threads, Body&& body) {
  const int count = end - begin;
  if (count <= 0) return;
  if (threads <= 1 || count < 64) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  threads = std::min(threads, count);
  const int chunk = (count + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mlabel
