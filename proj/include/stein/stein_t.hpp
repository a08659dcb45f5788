#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stein/error.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"

// The auxiliary statistic
//
//   T = 1/2 * sum_{A proper subset of [n]} T_A / (C(n,|A|) (n-|A|)),
//   T_A = sum_{j not in A} Delta_j f(X) Delta_j f(X^A),
//
// evaluated exactly by subset enumeration or by an unbiased importance
// sampler over (A, j), plus the normality bound built from it.

namespace stein {

inline constexpr std::size_t kExactTMaxN = 24;

/// C(n, k) for n <= 64 via Pascal's rule.
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// 1 / (C(n, k) (n - k)), the weight of each (A, j) pair with |A| = k.
inline double subset_weight(std::size_t n, std::size_t k) {
  return 1.0 / (static_cast<double>(binomial(n, k)) * static_cast<double>(n - k));
}

enum class EstimateMode { exact, monte_carlo };

struct TEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  EstimateMode mode = EstimateMode::exact;
};

/// Which conditional variance fed the first bound term.
enum class VarianceLevel { given_W, given_X, unconditional };

inline const char* to_string(VarianceLevel level) {
  switch (level) {
    case VarianceLevel::given_W: return "given_W";
    case VarianceLevel::given_X: return "given_X";
    case VarianceLevel::unconditional: return "unconditional";
  }
  return "?";
}

inline VarianceLevel parse_variance_level(const std::string& s) {
  if (s == "given_W") return VarianceLevel::given_W;
  if (s == "given_X") return VarianceLevel::given_X;
  if (s == "unconditional") return VarianceLevel::unconditional;
  throw ConfigError("unknown variance level '" + s + "'");
}

/// Assembled terms of a distance-to-normality bound.
struct BoundReport {
  double variance_term = 0.0;
  double third_moment_term = 0.0;
  double total = 0.0;
  double sigma2 = 0.0;
  VarianceLevel variance_level = VarianceLevel::given_X;
  // True when the total carries an unspecified universal constant (taken as
  // constant_C); such totals are rates, not certified bounds.
  bool modulo_constant = false;
  double constant_C = 1.0;
};

/// Exact T for a fixed (X, X') by enumerating all 2^n recombinations.
template <class Value>
TEstimate exact_T(const CoordinateModel<Value>& model, const PairedSample<Value>& sample) {
  const std::size_t n = sample.size();
  if (n != model.n()) throw InvalidArgumentError("sample length does not match model");
  if (n > kExactTMaxN)
    throw EnumerationLimitError("exact_T enumerates 2^n subsets; n=" + std::to_string(n) +
                                " exceeds " + std::to_string(kExactTMaxN));
  const std::uint64_t full = (std::uint64_t{1} << n);
  std::vector<double> f(full);
  std::vector<Value> z;
  for (std::uint64_t mask = 0; mask < full; ++mask) {
    recombine_mask(sample, mask, z);
    f[mask] = model(z);
  }
  std::vector<double> weight(n);
  for (std::size_t k = 0; k < n; ++k) weight[k] = subset_weight(n, k);

  double total = 0.0;
  for (std::uint64_t mask = 0; mask + 1 < full; ++mask) {
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    double t_a = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t bit = std::uint64_t{1} << j;
      if (mask & bit) continue;
      t_a += (f[0] - f[bit]) * (f[mask] - f[mask | bit]);
    }
    total += weight[k] * t_a;
  }
  return TEstimate{0.5 * total, 0.0, 1, EstimateMode::exact};
}

struct SubsetIndexPair {
  Subset subset;
  std::size_t j = 0;
};

/// Draws (A, j): |A| uniform on {0..n-1}, A uniform of that size, j uniform
/// off A. Each pair then has probability subset_weight(n, |A|) / n, so
/// T = (n/2) E[Delta_j f(X) Delta_j f(X^A)].
inline SubsetIndexPair sample_subset_index_pair(std::size_t n, Stream& stream) {
  if (n == 0) throw InvalidArgumentError("sample_subset_index_pair needs n >= 1");
  const auto k = static_cast<std::size_t>(stream.below(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Partial Fisher-Yates: first k slots form A, slot k is j.
  for (std::size_t i = 0; i <= k; ++i) {
    const auto r = i + static_cast<std::size_t>(stream.below(n - i));
    std::swap(perm[i], perm[r]);
  }
  SubsetIndexPair out;
  out.j = perm[k];
  out.subset = Subset(std::vector<std::size_t>(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k)), n);
  return out;
}

namespace detail {

// One unbiased draw (n/2) Delta_j f(X) Delta_j f(X^A); f_x = f(X).
template <class Value>
double t_draw(const CoordinateModel<Value>& model, const PairedSample<Value>& sample, double f_x,
              const SubsetIndexPair& pair, std::vector<Value>& scratch) {
  const std::size_t n = sample.size();
  const std::size_t j = pair.j;
  scratch = sample.x;
  scratch[j] = sample.x_prime[j];
  const double d_x = f_x - model(scratch);
  if (d_x == 0.0) return 0.0;
  scratch = sample.x;
  for (auto i : pair.subset.indices()) scratch[i] = sample.x_prime[i];
  const double f_a = model(scratch);
  scratch[j] = sample.x_prime[j];
  const double d_a = f_a - model(scratch);
  return 0.5 * static_cast<double>(n) * d_x * d_a;
}

}  // namespace detail

/// Unbiased Monte Carlo estimate of T for a fixed (X, X').
template <class Value>
TEstimate mc_T(const CoordinateModel<Value>& model, const PairedSample<Value>& sample,
               std::size_t reps, Stream& stream) {
  if (reps < 2) throw InvalidArgumentError("mc_T needs reps >= 2");
  if (sample.size() != model.n()) throw InvalidArgumentError("sample length does not match model");
  const double f_x = model(sample.x);
  std::vector<Value> scratch;
  std::vector<double> draws(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto pair = sample_subset_index_pair(sample.size(), stream);
    draws[r] = detail::t_draw(model, sample, f_x, pair, scratch);
  }
  const auto e = estimate_mean(draws);
  return TEstimate{e.mean, e.std_error, reps, EstimateMode::monte_carlo};
}

struct MeanTReport {
  double mean_T = 0.0;
  double mean_T_std_error = 0.0;
  double var_W = 0.0;
  // (mean_T - var_W) / standard error of the paired difference.
  double z = 0.0;
};

/// Estimates E(T) and Var(f(X)) from the same outer draws.
template <class Value>
MeanTReport estimate_mean_T_and_sigma2(const CoordinateModel<Value>& model,
                                       std::size_t outer_reps, std::size_t inner_reps,
                                       Stream& stream, unsigned threads = 1) {
  if (outer_reps < 2) throw InvalidArgumentError("estimate_mean_T_and_sigma2 needs outer_reps >= 2");
  if (inner_reps < 2) throw InvalidArgumentError("inner_reps must be >= 2");
  const Stream base(stream.fork_key());
  struct Draw {
    double t;
    double w;
  };
  auto draws = parallel_map(outer_reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    const auto pair = draw_pair(model, s);
    const auto t = mc_T(model, pair, inner_reps, s);
    return Draw{t.value, model(pair.x)};
  });
  std::vector<double> t(outer_reps), w(outer_reps);
  for (std::size_t r = 0; r < outer_reps; ++r) {
    t[r] = draws[r].t;
    w[r] = draws[r].w;
  }
  const auto tm = estimate_mean(t);
  const auto wm = sample_moments(w);
  const double m = static_cast<double>(outer_reps);
  std::vector<double> diff(outer_reps);
  for (std::size_t r = 0; r < outer_reps; ++r)
    diff[r] = t[r] - (w[r] - wm.mean) * (w[r] - wm.mean) * m / (m - 1.0);
  const auto dm = estimate_mean(diff);
  MeanTReport out;
  out.mean_T = tm.mean;
  out.mean_T_std_error = tm.std_error;
  out.var_W = wm.variance;
  const double gap = out.mean_T - out.var_W;
  out.z = dm.std_error > 0.0 ? gap / dm.std_error : (gap == 0.0 ? 0.0 : std::copysign(INFINITY, gap));
  return out;
}

/// Nested Monte Carlo estimate of Var(E(T | X)). Each inner draw uses a fresh
/// X' and a fresh (A, j); the within-X noise is removed by the two-level
/// ANOVA correction and the result floored at 0. std_error is the spread of
/// the per-X contributions.
template <class Value>
Estimate estimate_var_cond_T_given_X(const CoordinateModel<Value>& model, std::size_t outer_reps,
                                     std::size_t inner_reps, Stream& stream,
                                     unsigned threads = 1) {
  if (outer_reps < 2 || inner_reps < 2)
    throw InvalidArgumentError("estimate_var_cond_T_given_X needs outer_reps, inner_reps >= 2");
  const Stream base(stream.fork_key());
  struct Cell {
    double mean;
    double within_var;
  };
  auto cells = parallel_map(outer_reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    PairedSample<Value> pair;
    pair.x = model.draw(s);
    const double f_x = model(pair.x);
    std::vector<Value> scratch;
    std::vector<double> inner(inner_reps);
    for (std::size_t i = 0; i < inner_reps; ++i) {
      pair.x_prime = model.draw(s);
      const auto aj = sample_subset_index_pair(model.n(), s);
      inner[i] = detail::t_draw(model, pair, f_x, aj, scratch);
    }
    const auto m = sample_moments(inner);
    return Cell{m.mean, m.variance};
  });
  std::vector<double> means(outer_reps);
  for (std::size_t r = 0; r < outer_reps; ++r) means[r] = cells[r].mean;
  const auto mm = sample_moments(means);
  const double m = static_cast<double>(outer_reps);
  const double inner = static_cast<double>(inner_reps);
  std::vector<double> contrib(outer_reps);
  for (std::size_t r = 0; r < outer_reps; ++r) {
    const double dev = cells[r].mean - mm.mean;
    contrib[r] = dev * dev * m / (m - 1.0) - cells[r].within_var / inner;
  }
  const auto c = estimate_mean(contrib);
  Estimate out;
  out.mean = std::max(0.0, c.mean);
  out.std_error = c.std_error;
  out.reps = outer_reps;
  return out;
}

/// sqrt(var_cond_T)/sigma2 + sum_third_moments / (2 sigma2^{3/2}).
inline BoundReport theorem22_bound(double var_cond_T, double sigma2, double sum_third_moments,
                                   VarianceLevel level) {
  if (!(sigma2 > 0.0)) throw DegenerateStatisticError("sigma^2 must be positive");
  if (var_cond_T < 0.0 || sum_third_moments < 0.0)
    throw InvalidArgumentError("bound numerators must be nonnegative");
  BoundReport b;
  b.sigma2 = sigma2;
  b.variance_level = level;
  b.variance_term = std::sqrt(var_cond_T) / sigma2;
  b.third_moment_term = sum_third_moments / (2.0 * std::pow(sigma2, 1.5));
  b.total = b.variance_term + b.third_moment_term;
  return b;
}

// ---------------------------------------------------------------------------
// Exhaustive checks over enumerable models.

struct CovIdentityResult {
  double covariance = 0.0;  // Cov(g(X), f(X))
  double subset_sum = 0.0;  // the weighted randomized-derivative sum
  double residual = 0.0;
};

/// Cov(g, f) against 1/2 sum_A w_A sum_{j not in A} E[Delta_j g(X) Delta_j f(X^A)],
/// both computed exactly over the joint support of (X, X').
template <class Value>
CovIdentityResult cov_identity_check(
    const CoordinateModel<Value>& model,
    const std::function<double(std::span<const Value>)>& g,
    const std::function<double(std::span<const Value>)>& f) {
  const auto& support = require_support(model);
  const std::size_t n = model.n();
  if (n > kExactTMaxN) throw EnumerationLimitError("n too large for subset enumeration");

  double eg = 0.0, ef = 0.0, egf = 0.0;
  for_each_configuration(support, n, [&](const std::vector<Value>& x, double p) {
    const double gv = g(x), fv = f(x);
    eg += p * gv;
    ef += p * fv;
    egf += p * gv * fv;
  });

  const std::uint64_t full = std::uint64_t{1} << n;
  std::vector<double> weight(n);
  for (std::size_t k = 0; k < n; ++k) weight[k] = subset_weight(n, k);
  std::vector<double> fv(full);
  std::vector<Value> z;
  double rhs = 0.0;
  for_each_pair(model, [&](const PairedSample<Value>& s, double p) {
    for (std::uint64_t mask = 0; mask < full; ++mask) {
      recombine_mask(s, mask, z);
      fv[mask] = f(z);
    }
    const double g0 = g(s.x);
    std::vector<double> dg(n);
    for (std::size_t j = 0; j < n; ++j) {
      z = s.x;
      z[j] = s.x_prime[j];
      dg[j] = g0 - g(z);
    }
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask + 1 < full; ++mask) {
      const auto k = static_cast<std::size_t>(std::popcount(mask));
      double inner = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << j;
        if (mask & bit) continue;
        inner += dg[j] * (fv[mask] - fv[mask | bit]);
      }
      acc += weight[k] * inner;
    }
    rhs += p * 0.5 * acc;
  });
  CovIdentityResult out;
  out.covariance = egf - eg * ef;
  out.subset_sum = rhs;
  out.residual = std::abs(out.covariance - out.subset_sum);
  return out;
}

/// Exhaustive moments of W = f(X) and T over the joint support.
struct ExactTMoments {
  double mean_W = 0.0;
  double var_W = 0.0;
  double mean_T = 0.0;
  double var_T = 0.0;
  double var_cond_T_given_X = 0.0;
  double var_cond_T_given_W = 0.0;
};

template <class Value>
ExactTMoments exact_T_moments(const CoordinateModel<Value>& model) {
  const auto& support = require_support(model);
  const std::size_t n = model.n();
  const double states = std::pow(static_cast<double>(support.size()), 2.0 * static_cast<double>(n));
  if (states > kEnumerationLimit) throw EnumerationLimitError("joint support too large");

  double ew = 0.0, ew2 = 0.0, et = 0.0, et2 = 0.0, econd2 = 0.0;
  std::map<double, std::pair<double, double>> by_w;  // w -> (P(W=w), sum p E(T|x))
  PairedSample<Value> s;
  for_each_configuration(support, n, [&](const std::vector<Value>& x, double px) {
    s.x = x;
    const double w = model(x);
    double cond = 0.0, cond2 = 0.0;
    for_each_configuration(support, n, [&](const std::vector<Value>& xp, double pxp) {
      s.x_prime = xp;
      const double t = exact_T(model, s).value;
      cond += pxp * t;
      cond2 += pxp * t * t;
    });
    ew += px * w;
    ew2 += px * w * w;
    et += px * cond;
    et2 += px * cond2;
    econd2 += px * cond * cond;
    auto& cell = by_w[w];
    cell.first += px;
    cell.second += px * cond;
  });
  ExactTMoments out;
  out.mean_W = ew;
  out.var_W = ew2 - ew * ew;
  out.mean_T = et;
  out.var_T = et2 - et * et;
  out.var_cond_T_given_X = econd2 - et * et;
  double econd_w2 = 0.0;
  for (const auto& [w, cell] : by_w) {
    const double m = cell.second / cell.first;
    econd_w2 += cell.first * m * m;
  }
  out.var_cond_T_given_W = econd_w2 - et * et;
  return out;
}

/// A C^2 test function with a known bound on its second derivative.
struct SmoothTestFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double second_derivative_sup = 0.0;
};

struct Lemma24Report {
  double lhs_gap = 0.0;    // |E(phi(W) W) - E(phi'(W) T)|
  double rhs_bound = 0.0;  // ||phi''|| / 4 * sum_j E|Delta_j f|^3 (+ noise allowance)
  double sum_third_moments = 0.0;
  bool pass = false;
};

/// Monte Carlo check of |E(phi(W)W) - E(phi'(W)T)| <= ||phi''||/4 sum_j E|Delta_j f|^3.
/// T enters through one unbiased (A, j) draw per replication; the same j
/// gives an unbiased draw n |Delta_j f(X)|^3 of the third-moment sum.
template <class Value>
Lemma24Report lemma24_check(const CoordinateModel<Value>& model, const SmoothTestFunction& phi,
                            std::size_t reps, Stream& stream, unsigned threads = 1) {
  if (reps < 2) throw InvalidArgumentError("lemma24_check needs reps >= 2");
  const Stream base(stream.fork_key());
  const double n = static_cast<double>(model.n());
  struct Draw {
    double gap;
    double third;
  };
  auto draws = parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    const auto pair = draw_pair(model, s);
    const double w = model(pair.x);
    const auto aj = sample_subset_index_pair(model.n(), s);
    std::vector<Value> z = pair.x;
    z[aj.j] = pair.x_prime[aj.j];
    const double d_x = w - model(z);
    std::vector<Value> scratch;
    const double t = detail::t_draw(model, pair, w, aj, scratch);
    return Draw{phi.value(w) * w - phi.derivative(w) * t, n * std::pow(std::abs(d_x), 3)};
  });
  std::vector<double> gap(reps), third(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    gap[r] = draws[r].gap;
    third[r] = draws[r].third;
  }
  const auto g = estimate_mean(gap);
  const auto t = estimate_mean(third);
  const double scale = phi.second_derivative_sup / 4.0;
  const double noise = std::sqrt(g.std_error * g.std_error + scale * scale * t.std_error * t.std_error);
  Lemma24Report out;
  out.lhs_gap = std::abs(g.mean);
  out.sum_third_moments = t.mean;
  out.rhs_bound = scale * t.mean + 3.0 * noise;
  out.pass = out.lhs_gap <= out.rhs_bound;
  return out;
}

/// Exhaustive version of lemma24_check (no noise allowance).
template <class Value>
Lemma24Report lemma24_check_exact(const CoordinateModel<Value>& model,
                                  const SmoothTestFunction& phi) {
  const auto& support = require_support(model);
  const std::size_t n = model.n();
  double e_phi_w = 0.0;
  for_each_configuration(support, n, [&](const std::vector<Value>& x, double p) {
    const double w = model(x);
    e_phi_w += p * phi.value(w) * w;
  });
  double e_dphi_t = 0.0, third = 0.0;
  for_each_pair(model, [&](const PairedSample<Value>& s, double p) {
    const double w = model(s.x);
    e_dphi_t += p * phi.derivative(w) * exact_T(model, s).value;
    auto z = s.x;
    for (std::size_t j = 0; j < n; ++j) {
      z[j] = s.x_prime[j];
      third += p * std::pow(std::abs(w - model(z)), 3);
      z[j] = s.x[j];
    }
  });
  Lemma24Report out;
  out.lhs_gap = std::abs(e_phi_w - e_dphi_t);
  out.sum_third_moments = third;
  out.rhs_bound = phi.second_derivative_sup / 4.0 * third;
  out.pass = out.lhs_gap <= out.rhs_bound + 1e-12;
  return out;
}

struct EfronSteinReport {
  double variance = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Var g(Y) <= 1/2 sum_i E[(g(.., Y'_i, ..) - g(Y))^2], both sides exact.
template <class Value>
EfronSteinReport efron_stein_check(const CoordinateModel<Value>& model,
                                   const std::function<double(std::span<const Value>)>& g) {
  const auto& support = require_support(model);
  const std::size_t n = model.n();
  double e = 0.0, e2 = 0.0, half_sum = 0.0;
  for_each_configuration(support, n, [&](const std::vector<Value>& y, double p) {
    const double gy = g(y);
    e += p * gy;
    e2 += p * gy * gy;
    auto z = y;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& atom : support) {
        z[i] = atom.value;
        const double d = g(z) - gy;
        half_sum += 0.5 * p * atom.probability * d * d;
      }
      z[i] = y[i];
    }
  });
  EfronSteinReport out;
  out.variance = e2 - e * e;
  out.bound = half_sum;
  out.pass = out.variance <= out.bound + 1e-12;
  return out;
}

}  // namespace stein
