// Deterministic parallel loop: work items write to preassigned slots, so the
// result is byte-identical for any worker count.
#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace sdelab {

inline int default_worker_count() {
  if (const char* env = std::getenv("SDELAB_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

// Runs body(i) for i in [0, n) over `workers` threads, striped by index.
template <typename Body>
void parallel_for(long n, int workers, Body&& body) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  const int w = int(std::min<long>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([t, w, n, &body] {
      for (long i = t; i < n; i += w) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sdelab
