#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace imsam::detail {

// Runs body(0..n-1) over a static partition of worker threads. On failure the
// exception from the lowest failing index is rethrown; indices below it have
// all completed, so the reported failure is schedule-independent.
inline void parallel_for_indexed(long n, int n_threads, const std::function<void(long)>& body) {
  if (n <= 0) return;
  const unsigned hw = std::thread::hardware_concurrency();
  long workers = n_threads > 0 ? n_threads : (hw ? static_cast<long>(hw) : 1);
  workers = std::min(workers, n);

  if (workers <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }

  std::mutex mu;
  long fail_index = -1;
  std::exception_ptr fail;

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w) {
    const long begin = n * w / workers;
    const long end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      for (long i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (fail_index < 0 || i < fail_index) {
            fail_index = i;
            fail = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (fail) std::rethrow_exception(fail);
}

}  // namespace imsam::detail
