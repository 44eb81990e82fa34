#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace puflearn {

/// Worker count: PUFLEARN_THREADS if set, else hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("PUFLEARN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs fn(i) for i in [0, count) on a small work pool. Each task must be
/// pure given its index (all randomness through per-index derived streams)
/// and write only to its own output slot, so scheduling order is invisible.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned n_threads = 0) {
  if (n_threads == 0) n_threads = default_thread_count();
  n_threads = std::min<std::size_t>(n_threads, count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace puflearn
