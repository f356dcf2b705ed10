#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace wbc {

// Process-wide worker cap used when a call does not pass its own count.
void set_default_threads(int threads);
int default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers with a static
/// contiguous split. Results must be written to per-index slots so the outcome
/// does not depend on the worker count. The first exception (lowest index
/// range) is rethrown after all workers finish.
template <class Body>
void parallel_for(int n, Body&& body, int threads = 0) {
  if (threads <= 0)
    threads = default_threads();
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    pool.emplace_back([&, t, begin, end] {
      try {
        for (int i = begin; i < end; ++i)
          body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool)
    th.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace wbc
