#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "stein/error.hpp"
#include "stein/graph.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"

// Checks for graphical rules: symmetry, extension, the four-point
// noninteraction identity, degree statistics, and the bound built on them.

namespace stein {

/// y with y[perm[i]] = x[i]: coordinate i moves to slot perm[i].
template <class Value>
std::vector<Value> permute_coordinates(std::span<const Value> x, std::span<const std::size_t> perm) {
  std::vector<Value> y(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) y[perm[i]] = x[i];
  return y;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, Stream& stream) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[stream.below(i)]);
  return p;
}

/// G(y) must have exactly the edges {perm[i], perm[j]} for {i, j} in G(x).
template <class Value>
bool symmetric_at(const GraphicalRule<Value>& rule, std::span<const Value> x,
                  std::span<const std::size_t> perm) {
  if (perm.size() != x.size()) throw InvalidArgumentError("permutation length mismatch");
  std::vector<char> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) throw InvalidArgumentError("not a permutation");
    seen[p] = 1;
  }
  const auto g = rule(x);
  std::vector<IndexGraph::Edge> mapped;
  mapped.reserve(g.edge_count());
  for (const auto& [a, b] : g.edges())
    mapped.emplace_back(static_cast<std::uint32_t>(perm[a]), static_cast<std::uint32_t>(perm[b]));
  const auto y = permute_coordinates(x, perm);
  return rule(std::span<const Value>(y)) == IndexGraph(x.size(), std::move(mapped));
}

template <class Value>
struct SymmetryReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::optional<std::pair<std::vector<Value>, std::vector<std::size_t>>> counterexample;
  bool pass() const { return violations == 0; }
};

/// Randomized symmetry check over draws of x from the model and uniform permutations.
template <class Value>
SymmetryReport<Value> check_symmetry(const GraphicalRule<Value>& rule,
                                     const CoordinateModel<Value>& model, std::size_t trials,
                                     Stream& stream, unsigned threads = 1) {
  const Stream base(stream.fork_key());
  auto ok = parallel_map(trials, threads, [&](std::size_t t) -> char {
    Stream s = base.derive(t);
    const auto x = model.draw(s);
    const auto perm = random_permutation(x.size(), s);
    return symmetric_at(rule, std::span<const Value>(x), perm) ? 1 : 0;
  });
  SymmetryReport<Value> out;
  out.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    if (ok[t]) continue;
    ++out.violations;
    if (!out.counterexample) {
      Stream s = base.derive(t);
      auto x = model.draw(s);
      auto perm = random_permutation(x.size(), s);
      out.counterexample.emplace(std::move(x), std::move(perm));
    }
  }
  return out;
}

/// f(x) - f(x^j) - f(x^i) + f(x^{ij}); zero iff i and j do not interact.
template <class Value, class F>
double check_noninteraction(const F& f, std::span<const Value> x, std::span<const Value> x_prime,
                            std::size_t i, std::size_t j) {
  if (i == j) throw InvalidArgumentError("noninteraction needs i != j");
  if (x.size() != x_prime.size() || i >= x.size() || j >= x.size())
    throw InvalidArgumentError("noninteraction index out of range");
  std::vector<Value> z(x.begin(), x.end());
  const double f0 = f(std::span<const Value>(z));
  z[j] = x_prime[j];
  const double fj = f(std::span<const Value>(z));
  z[i] = x_prime[i];
  const double fij = f(std::span<const Value>(z));
  z[j] = x[j];
  const double fi = f(std::span<const Value>(z));
  return f0 - fj - fi + fij;
}

template <class Value>
struct InteractionCounterexample {
  std::vector<Value> x;
  std::vector<Value> x_prime;
  std::size_t i = 0;
  std::size_t j = 0;
  double residual = 0.0;
  std::vector<double> local_residuals;  // per-summand residuals, when available
};

struct InteractionCheckReport {
  std::size_t trials = 0;
  std::size_t tested = 0;  // trials where {i, j} was absent from all four graphs
  std::size_t violations = 0;
  double max_abs_residual = 0.0;
};

template <class Value>
struct InteractionCheckResult : InteractionCheckReport {
  std::optional<InteractionCounterexample<Value>> first_counterexample;
};

/// Local summands of a statistic, for per-term residual reporting.
template <class Value>
using LocalTerms = std::function<std::vector<double>(std::span<const Value>)>;

/// Randomized check that non-edges in G(x), G(x^i), G(x^j), G(x^{ij}) imply
/// noninteraction. Residuals above `tolerance` count as violations.
template <class Value>
InteractionCheckResult<Value> check_interaction_rule(const CoordinateModel<Value>& model,
                                                     const GraphicalRule<Value>& rule,
                                                     std::size_t trials, Stream& stream,
                                                     double tolerance = 1e-10, unsigned threads = 1,
                                                     LocalTerms<Value> local_terms = {}) {
  const std::size_t n = model.n();
  if (n < 2) throw InvalidArgumentError("interaction check needs n >= 2");
  const Stream base(stream.fork_key());
  struct Trial {
    char tested = 0;
    double residual = 0.0;
  };
  auto run = [&](std::size_t t, InteractionCounterexample<Value>* keep) {
    Stream s = base.derive(t);
    auto pair = draw_pair(model, s);
    const auto i = static_cast<std::size_t>(s.below(n));
    auto j = static_cast<std::size_t>(s.below(n - 1));
    if (j >= i) ++j;
    Trial out;
    std::vector<Value> z = pair.x;
    auto edge_in = [&](const std::vector<Value>& v) {
      return rule(std::span<const Value>(v)).has_edge(i, j);
    };
    if (edge_in(z)) return out;
    z[i] = pair.x_prime[i];
    if (edge_in(z)) return out;
    z[j] = pair.x_prime[j];
    if (edge_in(z)) return out;
    z[i] = pair.x[i];
    if (edge_in(z)) return out;
    out.tested = 1;
    out.residual = check_noninteraction<Value>(model.statistic(), pair.x, pair.x_prime, i, j);
    if (keep) {
      keep->x = pair.x;
      keep->x_prime = pair.x_prime;
      keep->i = i;
      keep->j = j;
      keep->residual = out.residual;
      if (local_terms) {
        z = pair.x;
        const auto l0 = local_terms(std::span<const Value>(z));
        z[j] = pair.x_prime[j];
        const auto lj = local_terms(std::span<const Value>(z));
        z[i] = pair.x_prime[i];
        const auto lij = local_terms(std::span<const Value>(z));
        z[j] = pair.x[j];
        const auto li = local_terms(std::span<const Value>(z));
        keep->local_residuals.resize(l0.size());
        for (std::size_t l = 0; l < l0.size(); ++l)
          keep->local_residuals[l] = l0[l] - lj[l] - li[l] + lij[l];
      }
    }
    return out;
  };
  auto results = parallel_map(trials, threads, [&](std::size_t t) { return run(t, nullptr); });
  InteractionCheckResult<Value> report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& r = results[t];
    if (!r.tested) continue;
    ++report.tested;
    report.max_abs_residual = std::max(report.max_abs_residual, std::abs(r.residual));
    if (std::abs(r.residual) > tolerance) {
      ++report.violations;
      if (!report.first_counterexample) {
        InteractionCounterexample<Value> ce;
        run(t, &ce);
        report.first_counterexample = std::move(ce);
      }
    }
  }
  return report;
}

enum class ExtensionMode {
  exact,       // G(x) equals the induced subgraph of G'(y)
  containment  // every edge of G(x) appears in the induced subgraph
};

template <class Value>
struct ExtensionReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::optional<std::pair<std::vector<Value>, std::vector<std::size_t>>> counterexample;  // (y, embedding)
  bool pass() const { return failures == 0; }
};

/// Draws y of length m, embeds a random n-subvector x (x[k] = y[idx[k]]) and
/// compares base(x) with the subgraph of ext(y) induced on idx.
template <class Value>
ExtensionReport<Value> check_extension(const GraphicalRule<Value>& base_rule,
                                       const GraphicalRule<Value>& ext_rule,
                                       const CoordinateModel<Value>& model, std::size_t m,
                                       ExtensionMode mode, std::size_t trials, Stream& stream,
                                       unsigned threads = 1) {
  const std::size_t n = model.n();
  if (m <= n) throw InvalidArgumentError("extension length must exceed n");
  const Stream base(stream.fork_key());
  auto draw = [&](std::size_t t) {
    Stream s = base.derive(t);
    auto y = model.draw(s, m);
    auto perm = random_permutation(m, s);
    perm.resize(n);
    return std::make_pair(std::move(y), std::move(perm));
  };
  auto ok = parallel_map(trials, threads, [&](std::size_t t) -> char {
    const auto [y, idx] = draw(t);
    std::vector<Value> x(n, y.front());
    for (std::size_t k = 0; k < n; ++k) x[k] = y[idx[k]];
    const auto g = base_rule(std::span<const Value>(x));
    const auto induced = ext_rule(std::span<const Value>(y)).induced(idx);
    return (mode == ExtensionMode::exact ? g == induced : g.subgraph_of(induced)) ? 1 : 0;
  });
  ExtensionReport<Value> out;
  out.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    if (ok[t]) continue;
    ++out.failures;
    if (!out.counterexample) out.counterexample = draw(t);
  }
  return out;
}

struct DegreeStats {
  double mean_delta4 = 0.0;  // E(delta^4), delta = 1 + deg of vertex 0 in G'(X_1..X_{n+4})
  double se_delta4 = 0.0;
  double mean_M8 = 0.0;      // E(M^8), M = max_j |Delta_j f(X)|
  double se_M8 = 0.0;
  std::size_t max_delta = 0;
  std::size_t reps = 0;
};

template <class Value>
DegreeStats estimate_degree_and_M_stats(const CoordinateModel<Value>& model,
                                        const GraphicalRule<Value>& rule_ext, std::size_t reps,
                                        Stream& stream, unsigned threads = 1) {
  if (reps < 2) throw InvalidArgumentError("degree statistics need reps >= 2");
  const std::size_t n = model.n();
  const Stream base(stream.fork_key());
  struct Draw {
    std::size_t delta;
    double m8;
  };
  auto draws = parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    const auto y = model.draw(s, n + 4);
    const std::size_t delta = 1 + rule_ext(std::span<const Value>(y)).degree(0);
    const auto pair = draw_pair(model, s);
    const double w = model(pair.x);
    auto z = pair.x;
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      z[j] = pair.x_prime[j];
      m = std::max(m, std::abs(w - model(z)));
      z[j] = pair.x[j];
    }
    return Draw{delta, std::pow(m, 8)};
  });
  std::vector<double> d4(reps), m8(reps);
  DegreeStats out;
  for (std::size_t r = 0; r < reps; ++r) {
    d4[r] = std::pow(static_cast<double>(draws[r].delta), 4);
    m8[r] = draws[r].m8;
    out.max_delta = std::max(out.max_delta, draws[r].delta);
  }
  const auto a = estimate_mean(d4);
  const auto b = estimate_mean(m8);
  out.mean_delta4 = a.mean;
  out.se_delta4 = a.std_error;
  out.mean_M8 = b.mean;
  out.se_M8 = b.std_error;
  out.reps = reps;
  return out;
}

/// (r)_k = r (r-1) ... (r-k+1).
inline double falling_factorial(double r, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 0; i < k; ++i) out *= (r - static_cast<double>(i));
  return out;
}

struct Lemma46Report {
  double lhs = 0.0;  // P({i, i_l} in G(X) for every l)
  double rhs = 0.0;  // E((d_0)_k) / (n-1)_k
  double z = 0.0;
};

/// Simulation check of P(all {i, i_l} are edges) = E((d_0)_k) / (n-1)_k for a
/// symmetric rule on i.i.d. coordinates.
template <class Value>
Lemma46Report lemma46_check(const GraphicalRule<Value>& rule, const CoordinateModel<Value>& model,
                            std::size_t i, std::span<const std::size_t> others, std::size_t reps,
                            Stream& stream, unsigned threads = 1) {
  const std::size_t n = model.n();
  const std::size_t k = others.size();
  if (!rule.claimed_symmetric) throw InvalidArgumentError("degree identity needs a symmetric rule");
  if (k == 0 || k > n - 1) throw InvalidArgumentError("need 1 <= k <= n-1 other indices");
  std::vector<std::size_t> all(others.begin(), others.end());
  all.push_back(i);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end() || all.back() >= n)
    throw InvalidArgumentError("indices must be distinct and in range");
  if (reps < 2) throw InvalidArgumentError("lemma46_check needs reps >= 2");
  const double denom = falling_factorial(static_cast<double>(n - 1), k);
  const Stream base(stream.fork_key());
  struct Draw {
    double ind;
    double ff;
  };
  auto draws = parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    const auto x = model.draw(s);
    const auto g = rule(std::span<const Value>(x));
    bool all_edges = true;
    for (auto o : others) all_edges = all_edges && g.has_edge(i, o);
    return Draw{all_edges ? 1.0 : 0.0, falling_factorial(static_cast<double>(g.degree(0)), k) / denom};
  });
  std::vector<double> lhs(reps), rhs(reps), diff(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    lhs[r] = draws[r].ind;
    rhs[r] = draws[r].ff;
    diff[r] = lhs[r] - rhs[r];
  }
  Lemma46Report out;
  out.lhs = sample_moments(lhs).mean;
  out.rhs = sample_moments(rhs).mean;
  const auto d = estimate_mean(diff);
  out.z = d.std_error > 0.0 ? d.mean / d.std_error : 0.0;
  return out;
}

/// C sqrt(n) E(M^8)^{1/4} E(delta^4)^{1/4} / sigma2 + sum_third / (2 sigma2^{3/2}).
inline BoundReport theorem25_bound(double sigma2, double mean_M8, double mean_delta4,
                                   double sum_third_moments, std::size_t n, double constant_C = 1.0) {
  if (!(sigma2 > 0.0)) throw DegenerateStatisticError("sigma^2 must be positive");
  if (!(constant_C > 0.0)) throw InvalidArgumentError("universal constant must be positive");
  if (mean_M8 < 0.0 || mean_delta4 < 0.0 || sum_third_moments < 0.0)
    throw InvalidArgumentError("bound inputs must be nonnegative");
  BoundReport b;
  b.sigma2 = sigma2;
  b.variance_level = VarianceLevel::given_X;
  b.modulo_constant = true;
  b.constant_C = constant_C;
  b.variance_term = constant_C * std::sqrt(static_cast<double>(n)) * std::pow(mean_M8, 0.25) *
                    std::pow(mean_delta4, 0.25) / sigma2;
  b.third_moment_term = sum_third_moments / (2.0 * std::pow(sigma2, 1.5));
  b.total = b.variance_term + b.third_moment_term;
  return b;
}

}  // namespace stein
