#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mvr {

/// Number of worker threads; `MVR_THREADS` caps the hardware default.
inline int thread_count() {
  static const int count = [] {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("MVR_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) n = std::min(n, cap);
    }
    return n;
  }();
  return count;
}

/// Runs body(i) for i in [0, n). Work items must be independent; the result
/// may not depend on the schedule. Small ranges run inline.
template <class Body>
void parallel_for(int n, Body&& body, int grain = 64) {
  const int workers = std::min(thread_count(), n / std::max(grain, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mvr
