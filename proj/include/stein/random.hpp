#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <iterator>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "stein/error.hpp"

namespace stein {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seeded random stream. Streams are passed explicitly to every sampling
/// routine; child streams are derived from a key path so that replication i
/// sees the same numbers no matter how work is scheduled.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed = 0) : key_(seed), engine_(detail::splitmix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t key() const noexcept { return key_; }

  /// Child stream keyed by (this stream's key, k). Does not advance *this.
  Stream derive(std::uint64_t k) const {
    return Stream(detail::splitmix64(key_ ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL)));
  }

  Stream derive(std::initializer_list<std::uint64_t> path) const {
    Stream s = *this;
    for (auto k : path) s = s.derive(k);
    return s;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., bound-1}; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
    return dist(engine_);
  }

  double normal() { return normal_(engine_); }

  int rademacher() { return (engine_() >> 63) ? 1 : -1; }

  /// Fresh base key for a batch of per-index child streams.
  std::uint64_t fork_key() { return engine_(); }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Evaluates fn(i) for i in [0, count) on up to `threads` workers and returns
/// the results in index order. fn must only depend on i (derive streams from i).
template <class Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(count);
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Mean with the standard error of the mean.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
};

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::size_t count = 0;
};

/// Two-pass mean / unbiased variance, summed in index order.
template <class Range>
SampleMoments sample_moments(const Range& values) {
  SampleMoments m;
  m.count = static_cast<std::size_t>(std::distance(std::begin(values), std::end(values)));
  if (m.count == 0) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(m.count);
  if (m.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.variance = ss / static_cast<double>(m.count - 1);
  }
  return m;
}

template <class Range>
Estimate estimate_mean(const Range& values) {
  const auto m = sample_moments(values);
  Estimate e;
  e.mean = m.mean;
  e.reps = m.count;
  e.std_error = m.count > 1 ? std::sqrt(m.variance / static_cast<double>(m.count)) : 0.0;
  return e;
}

}  // namespace stein
