#pragma once
// Minimal deterministic parallel loop; thread count capped by CGOSCATTER_THREADS.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cgs {

inline int maxThreads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (hw > 8) hw = 8;
  if (const char* env = std::getenv("CGOSCATTER_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < hw) hw = cap;
  }
  return hw;
}

// Results must be written to preallocated per-index slots so that output is
// independent of scheduling.
inline void parallelFor(size_t count, const std::function<void(size_t)>& fn) {
  int nt = maxThreads();
  if (nt <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  size_t workers = std::min<size_t>(static_cast<size_t>(nt), count);
  std::exception_ptr err;
  std::mutex errMutex;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(errMutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

} // namespace cgs
