#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stein/gauss.hpp"
#include "stein/harness/config.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"
#include "stein/zoo/coverage.hpp"
#include "stein/zoo/nearest_neighbor.hpp"
#include "stein/zoo/occupancy.hpp"
#include "stein/zoo/quadratic_form.hpp"

namespace stein::harness {

enum class Sigma2Provenance { exact, asymptotic, empirical };

inline const char* to_string(Sigma2Provenance p) {
  switch (p) {
    case Sigma2Provenance::exact: return "exact";
    case Sigma2Provenance::asymptotic: return "asymptotic";
    case Sigma2Provenance::empirical: return "empirical";
  }
  return "?";
}

inline Sigma2Provenance parse_provenance(const std::string& s) {
  if (s == "exact") return Sigma2Provenance::exact;
  if (s == "asymptotic") return Sigma2Provenance::asymptotic;
  if (s == "empirical") return Sigma2Provenance::empirical;
  throw ConfigError("unknown sigma2 provenance '" + s + "'");
}

struct ExperimentRecord {
  std::string model;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  EmpiricalDistance delta;
  double delta_se_proxy = 0.0;  // bootstrap proxy, not a principled standard error
  BoundReport bound;
  double sigma2 = 0.0;
  Sigma2Provenance sigma2_provenance = Sigma2Provenance::empirical;
  double wall_ms = 0.0;
  std::uint64_t fingerprint = 0;
};

namespace detail {

// Stream path tags under (seed, n).
enum : std::uint64_t { kTagDraws = 1, kTagBound = 2, kTagInstance = 3, kTagBootstrap = 4 };

template <class Value>
std::vector<double> draw_statistics(const CoordinateModel<Value>& cm, std::size_t reps, const Stream& base,
                                    unsigned threads) {
  return parallel_map(reps, threads, [&](std::size_t r) {
    Stream s = base.derive(r);
    return cm(cm.draw(s));
  });
}

template <class Value>
BoundReport theorem22_mc(const CoordinateModel<Value>& cm, double sigma2, const BoundOptions& opt, Stream& s,
                         unsigned threads) {
  const auto v = estimate_var_cond_T_given_X(cm, opt.outer_reps, opt.inner_reps, s, threads);
  const auto third = delta_third_moment_sum(cm, opt.third_moment_reps, s, threads);
  return theorem22_bound(v.mean, sigma2, third.mean, VarianceLevel::given_X);
}

/// What one grid point needs: the draws, how to standardize, and the bound.
struct Evaluated {
  std::vector<double> w;
  std::optional<double> mean;  // exact mean when known
  double sigma2 = 0.0;
  Sigma2Provenance provenance = Sigma2Provenance::empirical;
  BoundReport bound;
};

inline Evaluated finish_empirical(std::vector<double> w) {
  Evaluated e;
  const auto m = sample_moments(w);
  if (!(m.variance > 0.0)) throw DegenerateStatisticError("statistic has zero sample variance");
  e.sigma2 = m.variance;
  e.provenance = Sigma2Provenance::empirical;
  e.w = std::move(w);
  return e;
}

template <std::size_t D>
Evaluated run_coverage(const ExperimentConfig& c, std::size_t n, const Stream& root) {
  const auto& mb = c.model;
  const double eps = mb.epsilon_scale * std::pow(static_cast<double>(n), -1.0 / static_cast<double>(D));
  AreaEstimator est = GridArea{mb.resolution};
  if (mb.estimator == "monte_carlo") est = MonteCarloArea{mb.probes, mb.probe_seed};
  const CoverageModel<D> model(n, eps, est);
  const auto cm = model.coordinate_model();
  auto e = finish_empirical(draw_statistics(cm, c.replications, root.derive(kTagDraws), c.threads));
  Stream bs = root.derive(kTagBound);
  if (c.bound.method == "theorem22") {
    e.bound = theorem22_mc(cm, e.sigma2, c.bound, bs, c.threads);
  } else {
    const auto p = coverage_p_eps<D>(eps, c.bound.outer_reps * c.bound.inner_reps, bs);
    e.bound = prop33_bound(coverage_M_eps(D, eps), p.mean, e.sigma2, n, c.bound.constant_C);
  }
  return e;
}

template <std::size_t D>
Evaluated run_nearest_neighbor(const ExperimentConfig& c, std::size_t n, const Stream& root) {
  const auto& mb = c.model;
  const double radius = mb.radius_scale * std::pow(static_cast<double>(n), -1.0 / static_cast<double>(D));
  const NnModel<D> model(n, mb.k, parse_nn_functional(mb.functional), radius);
  const auto cm = model.coordinate_model();
  auto e = finish_empirical(draw_statistics(cm, c.replications, root.derive(kTagDraws), c.threads));
  Stream bs = root.derive(kTagBound);
  if (c.bound.method == "theorem22") {
    e.bound = theorem22_mc(cm, e.sigma2, c.bound, bs, c.threads);
    return e;
  }
  // gamma_p from the summand at index 0: E|f_0|^p, or its observed sup when p is infinite.
  const bool inf = mb.p_moment == 0.0;
  const Stream gb(bs.fork_key());
  const auto f0 = parallel_map(c.bound.third_moment_reps, c.threads, [&](std::size_t r) {
    Stream s = gb.derive(r);
    return std::abs(model.local_terms(cm.draw(s))[0]);
  });
  double gamma = 0.0;
  if (inf) {
    for (double v : f0) gamma = std::max(gamma, v);
  } else {
    for (double v : f0) gamma += std::pow(v, mb.p_moment);
    gamma /= static_cast<double>(f0.size());
  }
  e.bound = theorem34_bound(static_cast<double>(alpha_cones(D)), mb.k, gamma,
                            inf ? std::numeric_limits<double>::infinity() : mb.p_moment, e.sigma2, n,
                            c.bound.constant_C);
  return e;
}

inline Evaluated evaluate(const ExperimentConfig& c, std::size_t n, const Stream& root) {
  const auto& mb = c.model;
  const bool force22 = c.bound.method == "theorem22";
  Evaluated e;
  switch (mb.kind) {
    case ModelKind::rademacher_sum: {
      const auto cm = rademacher_sum_model(n);
      e.w = draw_statistics(cm, c.replications, root.derive(kTagDraws), c.threads);
      e.mean = 0.0;
      e.sigma2 = static_cast<double>(n);
      e.provenance = Sigma2Provenance::exact;
      Stream bs = root.derive(kTagBound);
      e.bound = theorem22_mc(cm, e.sigma2, c.bound, bs, c.threads);
      return e;
    }
    case ModelKind::quadratic_form: {
      Stream ms = root.derive(kTagInstance);
      const QuadraticFormModel model(mb.matrix == "goe" ? random_goe_matrix(n, ms) : random_block_matrix(n, ms));
      const auto cm = model.coordinate_model();
      e.w = draw_statistics(cm, c.replications, root.derive(kTagDraws), c.threads);
      e.mean = 0.0;
      e.sigma2 = model.sigma2_exact();
      e.provenance = Sigma2Provenance::exact;
      if (!(e.sigma2 > 0.0)) throw DegenerateStatisticError("quadratic form has zero variance at n=" + std::to_string(n));
      Stream bs = root.derive(kTagBound);
      e.bound = force22 ? theorem22_mc(cm, e.sigma2, c.bound, bs, c.threads) : prop31_bound(model);
      return e;
    }
    case ModelKind::occupancy: {
      const OccupancyModel model(n, mb.alpha);
      const auto cm = model.coordinate_model();
      e.w = draw_statistics(cm, c.replications, root.derive(kTagDraws), c.threads);
      e.mean = occ_mean_exact(model);
      e.sigma2 = occ_variance_exact(model);
      e.provenance = Sigma2Provenance::exact;
      if (!(e.sigma2 > 0.0)) throw DegenerateStatisticError("occupancy variance is zero at n=" + std::to_string(n));
      Stream bs = root.derive(kTagBound);
      e.bound = force22 ? theorem22_mc(cm, e.sigma2, c.bound, bs, c.threads) : prop32_bound(model, c.bound.constant_C);
      return e;
    }
    case ModelKind::coverage:
      if (mb.dimension == 1) return run_coverage<1>(c, n, root);
      if (mb.dimension == 2) return run_coverage<2>(c, n, root);
      return run_coverage<3>(c, n, root);
    case ModelKind::nearest_neighbor:
      if (mb.dimension == 1) return run_nearest_neighbor<1>(c, n, root);
      return run_nearest_neighbor<2>(c, n, root);
  }
  throw ConfigError("unhandled model kind");
}

}  // namespace detail

/// One record per n in the grid. Streams are keyed by (seed, n, purpose,
/// replication), so records do not depend on the thread count.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto fp = model_fingerprint(config.model);
  std::vector<ExperimentRecord> out;
  for (const auto n : config.n_grid) {
    const auto t0 = std::chrono::steady_clock::now();
    const Stream root = Stream(config.seed).derive(n);
    auto e = detail::evaluate(config, n, root);
    // Exact moments when the model has them; otherwise the draws' own moments.
    const auto std_rule =
        e.mean ? Standardization::known(*e.mean, std::sqrt(e.sigma2)) : Standardization::empirical();
    ExperimentRecord r;
    r.model = to_string(config.model.kind);
    r.n = n;
    r.replications = config.replications;
    r.seed = config.seed;
    r.delta = wasserstein1_to_gaussian(e.w, std_rule);
    Stream boot = root.derive(detail::kTagBootstrap);
    r.delta_se_proxy = wasserstein1_bootstrap_proxy(e.w, std_rule, config.bootstrap_resamples, boot);
    r.bound = e.bound;
    r.sigma2 = e.sigma2;
    r.sigma2_provenance = e.provenance;
    r.fingerprint = fp;
    if (config.output.timing)
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stein::harness
