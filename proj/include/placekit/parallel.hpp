#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace placekit {

// Worker count: hardware concurrency capped by PLACEKIT_THREADS.
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("PLACEKIT_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

// Runs fn(block) for block = 0..n_blocks-1 on a static stripe of workers.
// Results must be written to per-block slots so the reduction order (and
// therefore the result) is independent of the thread count.
inline void parallel_for_blocks(int n_blocks,
                                const std::function<void(int)>& fn) {
  int workers = std::min(worker_count(), n_blocks);
  if (workers <= 1) {
    for (int b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([=]() {
      for (int b = w; b < n_blocks; b += workers) fn(b);
    });
  }
  for (auto& th : pool) th.join();
}

// Deterministic pairwise sum of per-block partials.
inline double pairwise_sum(std::vector<double> v) {
  if (v.empty()) return 0.0;
  while (v.size() > 1) {
    size_t half = (v.size() + 1) / 2;
    for (size_t i = 0; i + half < v.size(); ++i) v[i] += v[i + half];
    v.resize(half);
  }
  return v[0];
}

}  // namespace placekit
