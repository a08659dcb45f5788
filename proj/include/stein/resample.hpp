#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stein/error.hpp"
#include "stein/random.hpp"

// Coordinate models, paired independent copies, and randomized derivatives.
//
// Indices are 0-based throughout: coordinate j of an n-vector is x[j] with
// 0 <= j < n.

namespace stein {

/// One atom of a finite coordinate law.
template <class Value>
struct SupportPoint {
  Value value;
  double probability;
};

/// An i.i.d. coordinate law paired with a statistic f on n-vectors.
template <class Value>
class CoordinateModel {
 public:
  using value_type = Value;
  using Vector = std::vector<Value>;
  using Sampler = std::function<Value(Stream&)>;
  using Statistic = std::function<double(std::span<const Value>)>;

  CoordinateModel(std::size_t n, Sampler sampler, Statistic statistic,
                  std::optional<std::vector<SupportPoint<Value>>> support = std::nullopt)
      : n_(n), sampler_(std::move(sampler)), statistic_(std::move(statistic)),
        support_(std::move(support)) {
    if (n_ == 0) throw InvalidArgumentError("coordinate model needs n >= 1");
    if (support_) {
      double total = 0.0;
      for (const auto& atom : *support_) {
        if (!(atom.probability >= 0.0))
          throw InvalidArgumentError("support probabilities must be nonnegative");
        total += atom.probability;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw InvalidArgumentError("support probabilities must sum to 1");
    }
  }

  std::size_t n() const noexcept { return n_; }
  const std::optional<std::vector<SupportPoint<Value>>>& support() const noexcept {
    return support_;
  }
  const Statistic& statistic() const noexcept { return statistic_; }

  Value draw_coordinate(Stream& stream) const { return sampler_(stream); }

  Vector draw(Stream& stream) const { return draw(stream, n_); }

  /// Draws `length` i.i.d. coordinates (used for the n+4 extension vectors).
  Vector draw(Stream& stream, std::size_t length) const {
    Vector v;
    v.reserve(length);
    for (std::size_t i = 0; i < length; ++i) v.push_back(sampler_(stream));
    return v;
  }

  double operator()(std::span<const Value> x) const { return statistic_(x); }

  /// Same law, new statistic.
  CoordinateModel with_statistic(Statistic g) const {
    return CoordinateModel(n_, sampler_, std::move(g), support_);
  }

 private:
  std::size_t n_;
  Sampler sampler_;
  Statistic statistic_;
  std::optional<std::vector<SupportPoint<Value>>> support_;
};

/// X and an independent copy X'.
template <class Value>
struct PairedSample {
  std::vector<Value> x;
  std::vector<Value> x_prime;

  std::size_t size() const noexcept { return x.size(); }
};

template <class Value>
PairedSample<Value> draw_pair(const CoordinateModel<Value>& model, Stream& stream) {
  PairedSample<Value> s;
  s.x = model.draw(stream);
  s.x_prime = model.draw(stream);
  return s;
}

/// The index set A selecting which coordinates come from X'.
class Subset {
 public:
  Subset() = default;

  /// Validates indices against n; throws InvalidSubsetError on duplicates or
  /// out-of-range entries.
  Subset(std::vector<std::size_t> indices, std::size_t n) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
      throw InvalidSubsetError("subset has duplicate indices");
    if (!indices_.empty() && indices_.back() >= n)
      throw InvalidSubsetError("subset index " + std::to_string(indices_.back()) +
                               " out of range for n=" + std::to_string(n));
  }

  static Subset from_mask(std::uint64_t mask, std::size_t n) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1U) idx.push_back(i);
    return Subset(std::move(idx), n);
  }

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  Subset with(std::size_t j, std::size_t n) const {
    auto idx = indices_;
    idx.push_back(j);
    return Subset(std::move(idx), n);
  }

  friend bool operator==(const Subset&, const Subset&) = default;

 private:
  std::vector<std::size_t> indices_;
};

/// X^A: x_prime on A, x elsewhere.
template <class Value>
std::vector<Value> recombine(const PairedSample<Value>& sample, const Subset& subset) {
  if (sample.x.size() != sample.x_prime.size())
    throw InvalidArgumentError("paired sample vectors differ in length");
  if (!subset.empty() && subset.indices().back() >= sample.size())
    throw InvalidSubsetError("subset index out of range for sample length");
  std::vector<Value> out = sample.x;
  for (auto i : subset.indices()) out[i] = sample.x_prime[i];
  return out;
}

/// Bitmask form of recombine for enumeration loops (n <= 64).
template <class Value>
void recombine_mask(const PairedSample<Value>& sample, std::uint64_t mask,
                    std::vector<Value>& out) {
  out = sample.x;
  for (std::size_t i = 0; i < out.size(); ++i)
    if ((mask >> i) & 1U) out[i] = sample.x_prime[i];
}

/// Delta_j f(X^A) = f(X^A) - f(X^{A u {j}}).
template <class Value>
double randomized_derivative(const CoordinateModel<Value>& model,
                             const PairedSample<Value>& sample, const Subset& base_subset,
                             std::size_t j) {
  if (j >= sample.size()) throw InvalidArgumentError("derivative index out of range");
  if (base_subset.contains(j))
    throw InvalidArgumentError("derivative index must not lie in the base subset");
  auto z = recombine(sample, base_subset);
  const double before = model(z);
  z[j] = sample.x_prime[j];
  return before - model(z);
}

/// Monte Carlo estimate of E|Delta_j f(X)|^3, fresh (X, X') per replication.
template <class Value>
Estimate delta_third_moment(const CoordinateModel<Value>& model, std::size_t j,
                            std::size_t reps, Stream& stream, unsigned threads = 1) {
  if (reps < 2) throw InvalidArgumentError("delta_third_moment needs reps >= 2");
  if (j >= model.n()) throw InvalidArgumentError("derivative index out of range");
  const Stream base(stream.fork_key());
  auto values = parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    auto x = model.draw(s);
    const double w = model(x);
    x[j] = model.draw_coordinate(s);
    return std::pow(std::abs(w - model(x)), 3);
  });
  return estimate_mean(values);
}

/// Estimate of sum_j E|Delta_j f(X)|^3. Each replication shares one (X, X')
/// draw across all j.
template <class Value>
Estimate delta_third_moment_sum(const CoordinateModel<Value>& model, std::size_t reps,
                                Stream& stream, unsigned threads = 1) {
  if (reps < 2) throw InvalidArgumentError("delta_third_moment_sum needs reps >= 2");
  const Stream base(stream.fork_key());
  auto values = parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    const auto pair = draw_pair(model, s);
    const double w = model(pair.x);
    auto z = pair.x;
    double total = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = pair.x_prime[j];
      total += std::pow(std::abs(w - model(z)), 3);
      z[j] = pair.x[j];
    }
    return total;
  });
  return estimate_mean(values);
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration over finite supports.

/// Joint states allowed in exhaustive oracles.
inline constexpr double kEnumerationLimit = 1e7;

template <class Value>
const std::vector<SupportPoint<Value>>& require_support(const CoordinateModel<Value>& model) {
  if (!model.support()) throw InvalidArgumentError("model has no enumerable support");
  return *model.support();
}

/// Calls fn(vector, probability) for every configuration of `length` i.i.d.
/// coordinates drawn from `support`.
template <class Value, class Fn>
void for_each_configuration(const std::vector<SupportPoint<Value>>& support, std::size_t length,
                            Fn&& fn) {
  const double states = std::pow(static_cast<double>(support.size()), static_cast<double>(length));
  if (states > kEnumerationLimit)
    throw EnumerationLimitError("enumeration of " + std::to_string(states) +
                                " states exceeds the limit");
  std::vector<std::size_t> digit(length, 0);
  std::vector<Value> v(length, support.front().value);
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < length; ++i) {
      v[i] = support[digit[i]].value;
      p *= support[digit[i]].probability;
    }
    fn(static_cast<const std::vector<Value>&>(v), p);
    std::size_t pos = 0;
    while (pos < length && ++digit[pos] == support.size()) digit[pos++] = 0;
    if (pos == length) break;
  }
}

/// Calls fn(sample, probability) over the joint law of (X, X').
template <class Value, class Fn>
void for_each_pair(const CoordinateModel<Value>& model, Fn&& fn) {
  const auto& support = require_support(model);
  const std::size_t n = model.n();
  PairedSample<Value> sample;
  for_each_configuration(support, 2 * n, [&](const std::vector<Value>& v, double p) {
    sample.x.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
    sample.x_prime.assign(v.begin() + static_cast<std::ptrdiff_t>(n), v.end());
    fn(static_cast<const PairedSample<Value>&>(sample), p);
  });
}

}  // namespace stein
