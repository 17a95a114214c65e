#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace conic {

// Thread cap honoring the CONIC_YAMABE_THREADS environment variable;
// at least 1.
inline int thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("CONIC_YAMABE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) cap = v;
  }
  return cap;
}

// Runs fn(i) for i in [0, count) on up to thread_cap() threads.
// Results must be written to disjoint preallocated slots so the
// outcome is independent of scheduling.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  const int threads = std::min(thread_cap(), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<int> next{0};
  for (int k = 0; k < threads; ++k)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace conic
