#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace recpipe {

// Deterministic work-sharing loop: each index is processed exactly once and
// callers write only to per-index slots, so output does not depend on the
// worker count. worker_id < workers lets callers keep per-worker scratch.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(unsigned worker_id, std::size_t i)>& fn) {
  if (workers == 0) workers = 1;
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(0, i);
    return;
  }
  const std::size_t chunk = 16;
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= n || failed.load(std::memory_order_relaxed)) break;
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        try {
          for (std::size_t i = begin; i < end; ++i) fn(w, i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) first_error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace recpipe
