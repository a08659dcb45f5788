#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <vector>

#include "stein/error.hpp"
#include "stein/graph.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"

// Empty boxes after n balls fall uniformly into m = alpha * n boxes.
// Box labels are 0-based: 0, ..., m-1.

namespace stein {

class OccupancyModel {
 public:
  OccupancyModel(std::size_t n_balls, double alpha) : n_(n_balls), alpha_(alpha) {
    if (n_ == 0) throw InvalidArgumentError("occupancy needs at least one ball");
    if (!(alpha > 0.0)) throw InvalidArgumentError("alpha must be positive");
    const double m = alpha * static_cast<double>(n_);
    const double rounded = std::round(m);
    if (std::abs(m - rounded) > 1e-9 * std::max(1.0, m))
      throw InvalidArgumentError("alpha * n must be an integer");
    if (rounded < 1.0) throw InvalidArgumentError("need at least one box");
    m_ = static_cast<std::size_t>(rounded);
  }

  std::size_t n_balls() const noexcept { return n_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t m_boxes() const noexcept { return m_; }

  CoordinateModel<int> coordinate_model() const;

 private:
  std::size_t n_;
  double alpha_;
  std::size_t m_ = 0;
};

inline double occ_statistic(const OccupancyModel& model, std::span<const int> x) {
  const std::size_t m = model.m_boxes();
  std::vector<char> hit(m, 0);
  std::size_t distinct = 0;
  for (int v : x) {
    if (v < 0 || static_cast<std::size_t>(v) >= m) throw InvalidCoordinateError("box label out of range");
    if (!hit[static_cast<std::size_t>(v)]) {
      hit[static_cast<std::size_t>(v)] = 1;
      ++distinct;
    }
  }
  return static_cast<double>(m - distinct);
}

/// alpha e^{-1/alpha} - (1 + alpha) e^{-2/alpha}: the limit of Var(W) / n.
inline double occ_variance_rate(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  return alpha * std::exp(-1.0 / alpha) - (1.0 + alpha) * std::exp(-2.0 / alpha);
}

inline double occ_f_alpha(double alpha) {
  const double base = occ_variance_rate(alpha);
  if (!(base > 0.0)) throw DomainError("variance rate is not positive for this alpha");
  return std::pow(base, -1.5);
}

inline double occ_sigma2_asymptotic(const OccupancyModel& model) {
  return occ_variance_rate(model.alpha()) * static_cast<double>(model.n_balls());
}

/// Sample variance of W over `reps` independent configurations.
inline Estimate occ_sigma2_empirical(const OccupancyModel& model, std::size_t reps, Stream& stream,
                                     unsigned threads = 1) {
  if (reps < 2) throw InvalidArgumentError("empirical variance needs reps >= 2");
  const auto cm = model.coordinate_model();
  const Stream base(stream.fork_key());
  auto w = parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    return cm(cm.draw(s));
  });
  const auto mom = sample_moments(w);
  // Standard error of the sample variance from the fourth central moment.
  double m4 = 0.0;
  for (double v : w) m4 += std::pow(v - mom.mean, 4);
  m4 /= static_cast<double>(reps);
  const double rn = static_cast<double>(reps);
  Estimate e;
  e.mean = mom.variance;
  e.reps = reps;
  e.std_error = std::sqrt(std::max(0.0, (m4 - mom.variance * mom.variance * (rn - 3.0) / (rn - 1.0)) / rn));
  return e;
}

/// E(W) = m (1 - 1/m)^n.
inline double occ_mean_exact(const OccupancyModel& model) {
  const double m = static_cast<double>(model.m_boxes());
  return m * std::pow(1.0 - 1.0 / m, static_cast<double>(model.n_balls()));
}

/// Var(W) = m(m-1)(1-2/m)^n + m(1-1/m)^n - m^2 (1-1/m)^{2n}.
inline double occ_variance_exact(const OccupancyModel& model) {
  const double m = static_cast<double>(model.m_boxes());
  const double n = static_cast<double>(model.n_balls());
  const double q1 = std::pow(1.0 - 1.0 / m, n);
  const double q2 = std::pow(1.0 - 2.0 / m, n);
  return std::max(0.0, m * (m - 1.0) * q2 + m * q1 - m * m * q1 * q1);
}

struct OccupancyMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance by full enumeration of the m^n configurations.
inline OccupancyMoments occ_moments_enumerated(const OccupancyModel& model) {
  const auto cm = model.coordinate_model();
  double s1 = 0.0, s2 = 0.0;
  for_each_configuration(require_support(cm), model.n_balls(), [&](const std::vector<int>& x, double p) {
    const double w = occ_statistic(model, x);
    s1 += p * w;
    s2 += p * w * w;
  });
  return {s1, s2 - s1 * s1};
}

/// Edge {i, j} iff balls i and j share a box. Applies to any length.
inline GraphicalRule<int> occ_rule() {
  return {"occupancy",
          [](std::span<const int> x) {
            std::vector<std::pair<int, std::uint32_t>> tagged(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) tagged[i] = {x[i], static_cast<std::uint32_t>(i)};
            std::sort(tagged.begin(), tagged.end());
            std::vector<std::vector<std::uint32_t>> groups;
            for (std::size_t i = 0; i < tagged.size();) {
              std::size_t j = i;
              std::vector<std::uint32_t> g;
              while (j < tagged.size() && tagged[j].first == tagged[i].first) g.push_back(tagged[j++].second);
              if (g.size() > 1) groups.push_back(std::move(g));
              i = j;
            }
            return IndexGraph::from_cliques(x.size(), groups);
          },
          true,
          {}};
}

/// C f(alpha) / sqrt(n), reported in the variance slot and flagged modulo C.
inline BoundReport prop32_bound(const OccupancyModel& model, double constant_C = 1.0) {
  if (!(constant_C > 0.0)) throw InvalidArgumentError("universal constant must be positive");
  BoundReport r;
  r.sigma2 = occ_sigma2_asymptotic(model);
  r.variance_level = VarianceLevel::given_X;
  r.modulo_constant = true;
  r.constant_C = constant_C;
  r.variance_term = constant_C * occ_f_alpha(model.alpha()) / std::sqrt(static_cast<double>(model.n_balls()));
  r.third_moment_term = 0.0;
  r.total = r.variance_term;
  return r;
}

inline CoordinateModel<int> OccupancyModel::coordinate_model() const {
  const auto self = *this;
  std::vector<SupportPoint<int>> support;
  support.reserve(m_);
  for (std::size_t b = 0; b < m_; ++b) support.push_back({static_cast<int>(b), 1.0 / static_cast<double>(m_)});
  // Exact-sum check in the model constructor tolerates 1e-12; renormalize the last atom.
  double head = 0.0;
  for (std::size_t b = 0; b + 1 < m_; ++b) head += support[b].probability;
  support.back().probability = 1.0 - head;
  const auto m = m_;
  return CoordinateModel<int>(
      n_, [m](Stream& s) { return static_cast<int>(s.below(m)); },
      [self](std::span<const int> x) { return occ_statistic(self, x); }, std::move(support));
}

}  // namespace stein
