#pragma once

// Worker-pool helpers with deterministic reductions.
//
// Index ranges are cut into fixed-size chunks whose boundaries do not depend
// on the thread count. Each chunk is reduced with compensated summation and
// the chunk partials are combined in index order, so results are bit-stable
// for any number of threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "lpmc/errors.hpp"

namespace lpmc {

inline constexpr std::size_t kChunk = 1024;

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

/// Number of worker threads used by kernels. 0 means "not set": the
/// PMC_THREADS environment variable is consulted, then defaults to 1.
inline int thread_count() {
  const int n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("PMC_THREADS")) {
    const int e = std::atoi(env);
    if (e > 0) return e;
  }
  return 1;
}

inline void set_thread_count(int n) {
  if (n < 0) throw UsageError("thread count must be nonnegative, got " + std::to_string(n));
  detail::thread_setting().store(n);
}

/// Kahan-Babuska accumulator.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

/// Calls body(begin, end, chunk_index) for each fixed chunk of [0, n).
inline void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                            std::size_t chunk = kChunk) {
  if (n == 0) return;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  const int threads = std::min<int>(thread_count(), static_cast<int>(n_chunks));
  auto run = [&](std::size_t c) { body(c * chunk, std::min(n, (c + 1) * chunk), c); };
  if (threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks; c = next++) run(c);
    });
  for (auto& th : pool) th.join();
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  parallel_chunks(n, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

/// Deterministic sum of f(i) over [0, n).
inline double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
  parallel_chunks(n, [&](std::size_t b, std::size_t e, std::size_t c) {
    KahanSum k;
    for (std::size_t i = b; i < e; ++i) k.add(f(i));
    partial[c] = k.value();
  });
  KahanSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

/// Deterministic maximum of f(i) over [0, n); -inf when n == 0.
inline double parallel_max(std::size_t n, const std::function<double(std::size_t)>& f) {
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, -std::numeric_limits<double>::infinity());
  parallel_chunks(n, [&](std::size_t b, std::size_t e, std::size_t c) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = b; i < e; ++i) m = std::max(m, f(i));
    partial[c] = m;
  });
  double m = -std::numeric_limits<double>::infinity();
  for (double p : partial) m = std::max(m, p);
  return m;
}

}  // namespace lpmc
