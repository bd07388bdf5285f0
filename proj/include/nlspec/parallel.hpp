#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace nlspec {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> value{0};
  return value;
}
inline bool& in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}
}  // namespace detail

/// Worker count used by parallel loops. Resolution order: explicit
/// set_thread_count(), NLSPEC_THREADS, hardware concurrency.
inline unsigned thread_count() {
  unsigned n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("NLSPEC_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void set_thread_count(unsigned n) { detail::thread_setting().store(n); }

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is
/// visited by exactly one worker, so results written per index are
/// independent of the worker count. Nested calls run serially.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned workers = 0) {
  if (workers == 0) workers = detail::in_parallel_region() ? 1 : thread_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_parallel_region() = true;
      try {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace nlspec
