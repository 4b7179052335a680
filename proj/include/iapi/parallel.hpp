#pragma once

// Deterministic data parallelism. Work is split into fixed-size chunks whose
// boundaries do not depend on the thread count, so results written per index
// (or reduced per chunk, then in chunk order) are bitwise identical for any
// IAPI_THREADS setting.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace iapi {

/// Worker count from IAPI_THREADS (0 or unset = hardware concurrency).
inline std::size_t thread_count() {
  std::size_t n = 0;
  if (const char* env = std::getenv("IAPI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<std::size_t>(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Calls fn(begin, end) over [0, count) in chunks of `chunk` indices.
/// The first exception thrown by any chunk is rethrown after all workers join;
/// when several chunks fail, the one with the lowest chunk index wins.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t chunk, Fn&& fn) {
  if (count == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  const std::size_t workers = std::min(thread_count(), chunks);
  std::vector<std::exception_ptr> errors(chunks);
  auto run = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    try {
      fn(begin, end);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) run(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Calls fn(i) for every i in [0, count).
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t chunk = 256) {
  parallel_chunks(count, chunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace iapi
