#pragma once
// Index-parallel loops. Results are written by index, so the output is the
// same for any thread count.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "core.hpp"

namespace covertime {

inline unsigned default_threads() {
  if (const char* s = std::getenv("COVERTIME_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v <= 0) throw ConfigError("COVERTIME_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1u : h;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(k);
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F&& f) {
  std::vector<T> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace covertime
