#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace roughcalc {

namespace detail {

inline std::atomic<int>& thread_override() {
  static std::atomic<int> count{0};  // 0 = auto
  return count;
}

inline int env_thread_request() {
  const char* raw = std::getenv("ROUGHCALC_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long parsed = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || parsed < 0 || parsed > 4096) return 0;
  return static_cast<int>(parsed);
}

}  // namespace detail

/// Sets the worker-thread count for subsequent parallel loops.
/// 0 = automatic (ROUGHCALC_THREADS env var, else hardware concurrency).
inline void set_threads(int count) {
  if (count < 0 || count > 4096)
    throw std::invalid_argument("set_threads: count must be in [0, 4096]");
  detail::thread_override().store(count);
}

inline int configured_threads() {
  const int forced = detail::thread_override().load();
  if (forced > 0) return forced;
  const int env = detail::env_thread_request();
  if (env > 0) return env;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

// Work is always split into the same fixed chunk grid regardless of how many
// threads execute it; per-chunk results must be written to disjoint storage.
constexpr std::size_t kChunkCount = 128;

inline std::size_t chunk_count_for(std::size_t count) {
  return count < kChunkCount ? count : kChunkCount;
}

template <class ChunkBody>
inline void run_chunked(std::size_t count, ChunkBody&& body) {
  if (count == 0) return;
  const std::size_t chunks = chunk_count_for(count);
  const auto bounds = [count, chunks](std::size_t c) {
    return std::make_pair(count * c / chunks, count * (c + 1) / chunks);
  };
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(configured_threads()), chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const auto [lo, hi] = bounds(c);
      body(c, lo, hi);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks || failed.load(std::memory_order_relaxed)) return;
      const auto [lo, hi] = bounds(c);
      try {
        body(c, lo, hi);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace detail

/// Applies body(i) for every i in [0, count) across the configured threads.
template <class Body>
inline void parallel_for(std::size_t count, Body&& body) {
  detail::run_chunked(count, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

/// Sum of term(i) over [0, count).  Terms are accumulated in index order
/// within fixed chunks and chunk subtotals combined in chunk order, so the
/// result is bit-identical for every thread count.
template <class Term>
inline double parallel_sum(std::size_t count, Term&& term) {
  if (count == 0) return 0.0;
  std::vector<double> partial(detail::chunk_count_for(count), 0.0);
  detail::run_chunked(count, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (const double p : partial) total += p;
  return total;
}

/// Max of term(i) over [0, count) (-inf on empty input is not supported:
/// count must be positive).  Deterministic for the same reason as above.
template <class Term>
inline double parallel_max(std::size_t count, Term&& term) {
  if (count == 0) throw std::invalid_argument("parallel_max: empty range");
  std::vector<double> partial(detail::chunk_count_for(count), 0.0);
  detail::run_chunked(count, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    double best = term(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) best = std::max(best, term(i));
    partial[c] = best;
  });
  double total = partial[0];
  for (const double p : partial) total = std::max(total, p);
  return total;
}

}  // namespace roughcalc
