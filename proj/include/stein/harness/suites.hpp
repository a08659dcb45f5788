#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stein/gauss.hpp"
#include "stein/graph.hpp"
#include "stein/harness/emit.hpp"
#include "stein/harness/experiment.hpp"
#include "stein/harness/rate.hpp"
#include "stein/interaction.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"
#include "stein/zoo/coverage.hpp"
#include "stein/zoo/kdtree.hpp"
#include "stein/zoo/nearest_neighbor.hpp"
#include "stein/zoo/occupancy.hpp"
#include "stein/zoo/quadratic_form.hpp"

// Invariant suites run by `check <suite>` and by the acceptance test. Each
// returns a verdict, human-readable details, and a deterministic record dump
// used to compare runs across thread counts.

namespace stein::harness {

struct SuiteResult {
  bool pass = true;
  std::vector<std::string> details;
  std::string records;
};

struct Suite {
  std::string id;
  std::string title;
  std::function<SuiteResult(std::uint64_t seed, unsigned threads)> run;
};

namespace suites {

/// Accumulates verdicts, detail lines and the record dump.
class Recorder {
 public:
  void value(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    records_ << key << ',' << buf << '\n';
  }
  void text(const std::string& key, const std::string& v) { records_ << key << ',' << v << '\n'; }
  void raw(const std::string& block) { records_ << block; }

  /// Records a named condition; all must hold for the suite to pass.
  void expect(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    details_.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details_.push_back("     " + what); }

  SuiteResult finish() { return {pass_, details_, records_.str()}; }

 private:
  bool pass_ = true;
  std::vector<std::string> details_;
  std::ostringstream records_;
};

inline std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
inline std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
inline std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// f(x) = table[bits of x], bit j set when x_j = +1.
inline CoordinateModel<int>::Statistic random_table_statistic(std::size_t n, Stream& s) {
  auto table = std::make_shared<std::vector<double>>(std::size_t{1} << n);
  for (auto& v : *table) v = s.uniform(-1.0, 1.0);
  return [table](std::span<const int> x) {
    std::size_t mask = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] == 1) mask |= std::size_t{1} << j;
    return (*table)[mask];
  };
}

inline CoordinateModel<int> random_table_model(std::size_t n, Stream& s) {
  return CoordinateModel<int>(
      n, [](Stream& r) { return r.rademacher(); }, random_table_statistic(n, s), rademacher_support());
}

// --- 1 ---------------------------------------------------------------------

inline SuiteResult covariance_identity(std::uint64_t seed, unsigned) {
  Recorder rec;
  Stream s(seed);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t t = 0; t < 20; ++t) {
      Stream ps = s.derive({n, t});
      const auto model = random_table_model(n, ps);
      const auto g = random_table_statistic(n, ps);
      const auto r = cov_identity_check<int>(model, g, model.statistic());
      worst = std::max(worst, r.residual);
      rec.value("residual_n" + std::to_string(n) + "_" + std::to_string(t), r.residual);
    }
  }
  rec.expect(worst <= 1e-10, fmt("max |Cov(g,f) - subset sum| = %.3g over n=1..5, 20 pairs each (tol 1e-10)", worst));
  return rec.finish();
}

// --- 2 ---------------------------------------------------------------------

inline SuiteResult mean_T_equals_variance(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  Stream s(seed);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 5; ++n) {
    Stream ps = s.derive({1, n});
    const auto table = random_table_model(n, ps);
    const QuadraticFormModel qf(random_dense_matrix(n, ps));
    const std::pair<std::string, CoordinateModel<int>> models[] = {{"table", table}, {"qf", qf.coordinate_model()}};
    for (const auto& [name, model] : models) {
      const auto mom = exact_T_moments(model);
      const double r = std::abs(mom.mean_T - mom.var_W);
      worst = std::max(worst, r);
      rec.value("exact_residual_n" + std::to_string(n) + "_" + name, r);
    }
  }
  rec.expect(worst <= 1e-10, fmt("exhaustive |E(T) - Var(W)| = %.3g for n <= 5 (tol 1e-10)", worst));
  for (std::size_t n : {16, 64}) {
    Stream ps = s.derive({2, n});
    const QuadraticFormModel qf(random_dense_matrix(n, ps));
    const OccupancyModel occ(n, 1.0);
    const std::pair<std::string, CoordinateModel<int>> models[] = {{"qf", qf.coordinate_model()},
                                                                   {"occupancy", occ.coordinate_model()}};
    for (const auto& [name, model] : models) {
      Stream es = ps.derive(name == "qf" ? 1 : 2);
      const auto r = estimate_mean_T_and_sigma2(model, 4000, 8, es, threads);
      rec.value("mc_z_" + name + "_n" + std::to_string(n), r.z);
      rec.expect(std::abs(r.z) <= 4.0, name + " n=" + std::to_string(n) +
                                           fmt(": E(T) ~ %.6g, Var(W) ~ %.6g, z = %.3f (|z| <= 4)", r.mean_T,
                                               r.var_W, r.z));
    }
  }
  return rec.finish();
}

// --- 3 ---------------------------------------------------------------------

inline SuiteResult mc_T_unbiased(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  Stream s(seed);
  std::size_t checked = 0, failed = 0;
  double worst_z = 0.0;
  for (std::size_t n : {6, 8}) {
    Stream ps = s.derive(n);
    const QuadraticFormModel qf(random_dense_matrix(n, ps));
    const OccupancyModel occ(n, 1.0);
    const std::pair<std::string, CoordinateModel<int>> models[] = {
        {"table", random_table_model(n, ps)}, {"qf", qf.coordinate_model()}, {"occupancy", occ.coordinate_model()}};
    for (const auto& [name, model] : models) {
      const Stream base = ps.derive(std::hash<std::string>{}(name) & 0xffff);
      const auto zs = parallel_map(10, threads, [&](std::size_t p) {
        Stream q = base.derive(p);
        const auto pair = draw_pair(model, q);
        const double exact = exact_T(model, pair).value;
        const auto mc = mc_T(model, pair, 100000, q);
        if (mc.std_error == 0.0) return std::abs(mc.value - exact) <= 1e-12 ? 0.0 : INFINITY;
        return (mc.value - exact) / mc.std_error;
      });
      for (std::size_t p = 0; p < zs.size(); ++p) {
        ++checked;
        failed += !(std::abs(zs[p]) <= 4.0);
        worst_z = std::max(worst_z, std::abs(zs[p]));
        rec.value("z_" + name + "_n" + std::to_string(n) + "_" + std::to_string(p), zs[p]);
      }
    }
  }
  rec.expect(failed == 0, fmt("%.0f of %.0f fixed pairs within 4 standard errors at 1e5 draws; max |z| = %.3f",
                              static_cast<double>(checked - failed), static_cast<double>(checked), worst_z));
  return rec.finish();
}

// --- 4 ---------------------------------------------------------------------

inline SuiteResult quadratic_form_closed_form(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  Stream s(seed);
  struct Row {
    double residual, var_closed, var_formula, half_tr_a4;
  };
  const auto rows = parallel_map(20, threads, [&](std::size_t t) {
    Stream ps = s.derive(t);
    const std::size_t n = 2 + t % 5;
    const QuadraticFormModel qf(random_dense_matrix(n, ps));
    const auto model = qf.coordinate_model();
    const auto& support = require_support(model);
    double worst = 0.0, e1 = 0.0, e2 = 0.0;
    PairedSample<int> pair;
    for_each_configuration(support, n, [&](const std::vector<int>& x, double px) {
      pair.x = x;
      double cond = 0.0;
      for_each_configuration(support, n, [&](const std::vector<int>& xp, double pxp) {
        pair.x_prime = xp;
        cond += pxp * exact_T(model, pair).value;
      });
      const double closed = qf_cond_T_closed(qf, x);
      worst = std::max(worst, std::abs(closed - cond));
      e1 += px * closed;
      e2 += px * closed * closed;
    });
    return Row{worst, e2 - e1 * e1, qf_cond_T_variance(qf), 0.5 * qf.squared().frobenius2()};
  });
  double worst = 0.0, worst_var = 0.0;
  bool ordered = true;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    worst = std::max(worst, rows[t].residual);
    worst_var = std::max(worst_var, std::abs(rows[t].var_closed - rows[t].var_formula));
    ordered = ordered && rows[t].var_formula <= rows[t].half_tr_a4;
    rec.value("residual_" + std::to_string(t), rows[t].residual);
    rec.value("var_" + std::to_string(t), rows[t].var_closed);
  }
  rec.expect(worst <= 1e-10, fmt("closed form vs exhaustive E(T|X): max residual %.3g (tol 1e-10)", worst));
  rec.expect(worst_var <= 1e-10, fmt("Var(E(T|X)) = sum_{i<j} b_ij^2: max gap %.3g", worst_var));
  rec.expect(ordered, "sum_{i<j} b_ij^2 <= Tr(A^4)/2 for all 20 matrices");
  return rec.finish();
}

// --- shared sweep helper ----------------------------------------------------

inline ExperimentConfig sweep_config(std::uint64_t seed, unsigned threads, ModelKind kind,
                                     std::vector<std::size_t> grid, std::size_t reps) {
  ExperimentConfig c;
  c.seed = seed;
  c.threads = threads;
  c.replications = reps;
  c.n_grid = std::move(grid);
  c.model.kind = kind;
  c.model.raw["kind"] = to_string(kind);
  c.output.timing = false;
  return c;
}

inline void record_sweep(Recorder& rec, const std::vector<ExperimentRecord>& records) {
  rec.raw(to_csv(records));
  for (const auto& r : records)
    rec.note("n=" + std::to_string(r.n) +
             fmt(": delta_hat %.5f (proxy %.5f), bound %.5g", r.delta.w1, r.delta_se_proxy, r.bound.total) +
             (r.bound.modulo_constant ? " [modulo C]" : ""));
}

// --- 5 ---------------------------------------------------------------------

inline SuiteResult quadratic_form_rate(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  auto c = sweep_config(seed, threads, ModelKind::quadratic_form, {32, 128, 512}, 10000);
  c.model.raw["matrix"] = "block";
  const auto records = run_experiment(c);
  record_sweep(rec, records);
  bool decreasing = true;
  for (std::size_t i = 1; i < records.size(); ++i) decreasing = decreasing && records[i].delta.w1 < records[i - 1].delta.w1;
  rec.expect(decreasing, "delta_hat decreases along n = 32, 128, 512");
  const auto fit = fit_rate(records);
  rec.value("slope", fit.slope);
  rec.expect(fit.slope >= -0.8 && fit.slope <= -0.2, fmt("fitted slope %.3f in [-0.8, -0.2] (r^2 %.3f)", fit.slope, fit.r2));
  bool covered = true;
  for (const auto& r : records) covered = covered && r.bound.total >= r.delta.w1 - 3.0 * r.delta_se_proxy;
  rec.expect(covered, "constant-explicit bound >= delta_hat - 3 proxies at every n");
  return rec.finish();
}

// --- 6 ---------------------------------------------------------------------

inline SuiteResult occupancy_rate(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  auto c = sweep_config(seed, threads, ModelKind::occupancy, {64, 256, 1024}, 10000);
  c.model.raw["alpha"] = "1";
  const auto records = run_experiment(c);
  record_sweep(rec, records);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : records) {
    const double scaled = r.delta.w1 * std::sqrt(static_cast<double>(r.n));
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  rec.value("scaled_ratio", hi / lo);
  rec.expect(hi / lo <= 3.0, fmt("max/min of delta_hat*sqrt(n) = %.3f (<= 3)", hi / lo));

  Stream s = Stream(seed).derive(7);
  const OccupancyModel small(24, 1.0);
  const auto cm = small.coordinate_model();
  const auto ir = check_interaction_rule(cm, occ_rule(), 100000, s, 1e-10, threads);
  rec.value("interaction_violations", static_cast<double>(ir.violations));
  rec.value("interaction_tested", static_cast<double>(ir.tested));
  rec.expect(ir.violations == 0, fmt("interaction rule: %.0f violations in 1e5 trials (%.0f tested)",
                                     static_cast<double>(ir.violations), static_cast<double>(ir.tested)));

  const OccupancyModel mid(20, 1.0);
  const auto mcm = mid.coordinate_model();
  const std::vector<std::pair<std::size_t, std::vector<std::size_t>>> cases = {
      {0, {1}}, {3, {5, 9}}, {2, {0, 1, 4}}, {7, {6}}};
  double worst = 0.0;
  for (std::size_t c_i = 0; c_i < cases.size(); ++c_i) {
    const auto& [i, others] = cases[c_i];
    const auto l = lemma46_check(occ_rule(), mcm, i, others, 100000, s, threads);
    worst = std::max(worst, std::abs(l.z));
    rec.value("edge_identity_z_" + std::to_string(c_i), l.z);
    rec.note(fmt("edge-probability identity: P = %.5f vs E(falling factorial) = %.5f, z = %.3f", l.lhs, l.rhs, l.z));
  }
  rec.expect(worst <= 4.0, fmt("edge-probability identity z-scores within +-4 (max %.3f)", worst));
  return rec.finish();
}

// --- 7 ---------------------------------------------------------------------

inline SuiteResult coverage_checks(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  auto c = sweep_config(seed, threads, ModelKind::coverage, {64, 256, 1024}, 10000);
  c.model.dimension = 2;
  c.model.resolution = 1024;
  c.model.raw["dimension"] = "2";
  const auto records = run_experiment(c);
  record_sweep(rec, records);
  const auto fit = fit_rate(records);
  rec.value("slope", fit.slope);
  rec.expect(fit.slope >= -0.8 && fit.slope <= -0.2, fmt("fitted slope %.3f in [-0.8, -0.2] (r^2 %.3f)", fit.slope, fit.r2));

  Stream s = Stream(seed).derive(7);
  {
    const double eps = 0.125;
    const CoverageModel<2> grid(64, eps, GridArea{1024});
    const CoverageModel<2> probe(64, eps, MonteCarloArea{100000, seed ^ 0x9e37});
    const auto cm = grid.coordinate_model();
    const Stream base(s.fork_key());
    const auto rel = parallel_map(100, threads, [&](std::size_t t) {
      Stream q = base.derive(t);
      const auto x = cm.draw(q);
      const double a = grid.area(x), b = probe.area(x);
      return std::abs(a - b) / a;
    });
    double worst = 0.0;
    for (std::size_t t = 0; t < rel.size(); ++t) {
      worst = std::max(worst, rel[t]);
      rec.value("area_rel_gap_" + std::to_string(t), rel[t]);
    }
    rec.expect(worst <= 0.01, fmt("grid vs probe area: max relative gap %.4f on 100 configurations (<= 1%%)", worst));
  }
  {
    const std::size_t n = 256;
    const double eps = 1.0 / std::sqrt(static_cast<double>(n));
    const CoverageModel<2> model(n, eps, GridArea{1024});
    const auto cm = model.coordinate_model();
    const double cap = coverage_M_eps(2, eps) + model.move_tolerance();
    const Stream base(s.fork_key());
    const auto d = parallel_map(2000, threads, [&](std::size_t t) {
      Stream q = base.derive(t);
      auto x = cm.draw(q);
      const double w = model.area(x);
      x[q.below(n)] = cm.draw_coordinate(q);
      return std::abs(w - model.area(x));
    });
    double worst = 0.0;
    for (double v : d) worst = std::max(worst, v);
    rec.value("max_move", worst);
    rec.expect(worst <= cap, fmt("|Delta_j f| <= M_eps + tolerance: max %.6g vs %.6g over 2000 moves", worst, cap));
  }
  {
    const CoverageModel<2> model(12, 0.15, GridArea{256});
    const auto ir = check_interaction_rule(model.coordinate_model(), cov_rule<2>(0.15), 100000, s, 1e-10, threads);
    rec.value("interaction_violations", static_cast<double>(ir.violations));
    rec.value("interaction_tested", static_cast<double>(ir.tested));
    rec.expect(ir.violations == 0, fmt("interaction rule: %.0f violations in 1e5 trials (%.0f tested)",
                                       static_cast<double>(ir.violations), static_cast<double>(ir.tested)));
  }
  return rec.finish();
}

// --- 8 ---------------------------------------------------------------------

template <std::size_t D>
void nn_case(Recorder& rec, std::size_t k, Stream& s, unsigned threads) {
  const std::string tag = "d" + std::to_string(D) + "_k" + std::to_string(k);
  const double alpha = static_cast<double>(alpha_cones(D));
  {
    const NnModel<D> model(16, k, NnFunctional::scaled_kth_distance);
    const auto ir = check_interaction_rule(model.coordinate_model(), nn_rule<D>(k), 100000, s, 1e-10, threads);
    rec.value("violations_" + tag, static_cast<double>(ir.violations));
    rec.value("tested_" + tag, static_cast<double>(ir.tested));
    rec.expect(ir.violations == 0, tag + fmt(": interaction rule %.0f violations in 1e5 trials (%.0f tested)",
                                             static_cast<double>(ir.violations), static_cast<double>(ir.tested)));
  }
  const std::size_t n = 40;
  const NnModel<D> model(n, k, NnFunctional::scaled_kth_distance);
  const auto cm = model.coordinate_model();
  const auto ext = nn_rule_ext<D>(k);
  const Stream base(s.fork_key());
  struct Obs {
    std::size_t degree, change;
  };
  const auto obs = parallel_map(10000, threads, [&](std::size_t t) {
    Stream q = base.derive(t);
    const auto y = cm.draw(q, n + 4);
    const auto pair = draw_pair(cm, q);
    const auto j = static_cast<std::size_t>(q.below(n));
    return Obs{ext(std::span<const Point<D>>(y)).max_degree(),
               nn_neighborhood_change_bound<D>(pair.x, pair.x_prime, j, k)};
  });
  std::size_t max_deg = 0, max_change = 0, over = 0;
  for (const auto& o : obs) {
    max_deg = std::max(max_deg, o.degree);
    max_change = std::max(max_change, o.change);
    over += o.change > static_cast<std::size_t>(2 * alpha * k);
  }
  const double deg_cap = alpha * static_cast<double>((k + 1) * (k + 5));
  rec.value("max_degree_" + tag, static_cast<double>(max_deg));
  rec.value("max_change_" + tag, static_cast<double>(max_change));
  rec.expect(static_cast<double>(max_deg) <= deg_cap,
             tag + fmt(": max extended-graph degree %.0f <= alpha(d)(k+1)(k+5) = %.0f", static_cast<double>(max_deg), deg_cap));
  rec.expect(static_cast<double>(max_change) <= 2 * alpha * static_cast<double>(k),
             tag + fmt(": max |N_j(x) u N_j(x^j)| = %.0f vs 2 alpha(d) k = %.0f", static_cast<double>(max_change),
                       2 * alpha * static_cast<double>(k)) +
                 " (" + std::to_string(over) + " of 10000 trials exceed)");
  // N_j contains j itself, so one extra index is always possible.
  rec.note(tag + fmt(": counting j, max %.0f vs 2 alpha(d) k + 1 = %.0f", static_cast<double>(max_change),
                     2 * alpha * static_cast<double>(k) + 1));
}

template <std::size_t D>
std::size_t kdtree_mismatches(std::size_t configs, Stream& s, unsigned threads) {
  const Stream base(s.fork_key());
  const auto bad = parallel_map(configs, threads, [&](std::size_t t) -> std::size_t {
    Stream q = base.derive(t);
    const std::size_t n = 2 + static_cast<std::size_t>(q.below(255));
    std::vector<Point<D>> x(n);
    for (auto& p : x)
      for (auto& c : p) c = q.uniform();
    const KdTree<D> tree(x, true);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t count = std::min<std::size_t>(n, 12);
      mismatches += tree.nearest(x[i], count) != nearest_bruteforce<D>(x, x[i], count);
    }
    return mismatches;
  });
  std::size_t total = 0;
  for (auto b : bad) total += b;
  return total;
}

inline SuiteResult nearest_neighbor_checks(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  Stream s(seed);
  for (std::size_t k = 1; k <= 3; ++k) {
    Stream s1 = s.derive({1, k});
    nn_case<1>(rec, k, s1, threads);
    Stream s2 = s.derive({2, k});
    nn_case<2>(rec, k, s2, threads);
  }
  Stream ks = s.derive(99);
  const auto bad = kdtree_mismatches<1>(500, ks, threads) + kdtree_mismatches<2>(500, ks, threads);
  rec.value("kdtree_mismatches", static_cast<double>(bad));
  rec.expect(bad == 0, fmt("kd-tree vs brute-force neighbor ranks: %.0f mismatching queries on 1000 configurations (n <= 256)",
                           static_cast<double>(bad)));
  return rec.finish();
}

// --- 9 ---------------------------------------------------------------------

inline SuiteResult stein_solver(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  Stream s(seed);
  std::vector<LipschitzFunction> family;
  for (int i = 0; i < 20; ++i) family.push_back(random_piecewise_linear(s));
  const auto grid = uniform_grid(-8.0, 8.0, 321);
  const auto reports = parallel_map(family.size(), threads, [&](std::size_t i) {
    return stein_constant_check({family[i]}, grid);
  });
  SteinConstantReport r;
  for (const auto& x : reports) {
    r.max_residual = std::max(r.max_residual, x.max_residual);
    r.max_dphi_ratio = std::max(r.max_dphi_ratio, x.max_dphi_ratio);
    r.max_d2phi_ratio = std::max(r.max_d2phi_ratio, x.max_d2phi_ratio);
  }
  rec.value("max_residual", r.max_residual);
  rec.value("max_dphi_ratio", r.max_dphi_ratio);
  rec.value("max_d2phi_ratio", r.max_d2phi_ratio);
  rec.expect(r.max_residual <= 1e-8, fmt("max Stein-equation residual on [-8, 8]: %.3g (<= 1e-8)", r.max_residual));
  rec.expect(r.max_dphi_ratio <= kSqrtTwoOverPi + 1e-3,
             fmt("sup |phi'| / ||h'|| = %.6f (<= sqrt(2/pi) + 1e-3 = %.6f)", r.max_dphi_ratio, kSqrtTwoOverPi + 1e-3));
  rec.expect(r.max_d2phi_ratio <= 2.0 + 1e-3, fmt("sup |phi''| / ||h'|| = %.6f (<= 2.001)", r.max_d2phi_ratio));
  return rec.finish();
}

// --- 10 --------------------------------------------------------------------

inline SuiteResult wasserstein_calibration(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  const Stream base(seed);
  const auto z = parallel_map(100000, threads, [&](std::size_t i) {
    Stream q = base.derive(i);
    return q.normal();
  });
  const auto d = wasserstein1_to_gaussian(z, Standardization::known(0.0, 1.0));
  rec.value("gaussian_w1", d.w1);
  rec.expect(d.w1 <= 0.02, fmt("W1 estimate for 1e5 Gaussian draws: %.5f (<= 0.02)", d.w1));
  const std::vector<double> zeros(100000, 0.0);
  const auto p = wasserstein1_to_gaussian(zeros, Standardization::known(0.0, 1.0));
  rec.value("point_mass_w1", p.w1);
  rec.expect(std::abs(p.w1 - 0.798) <= 0.01,
             fmt("point mass at 0: %.5f vs E|Z| = %.5f (0.798 +- 0.01)", p.w1, kSqrtTwoOverPi));
  return rec.finish();
}

// --- 11 --------------------------------------------------------------------

inline SuiteResult levina_bickel_checks(std::uint64_t seed, unsigned threads) {
  Recorder rec;
  const std::vector<Point<1>> line = {{0.0}, {1.0}, {3.0}};
  const double v = levina_bickel<1>(line, 2);
  rec.value("three_point", v);
  rec.expect(std::abs(v - 1.6064) <= 1e-3, fmt("3-point collinear value %.6f (1.6064 +- 1e-3)", v));

  Stream s(seed);
  std::vector<Point<2>> x(300);
  for (auto& p : x) p = {s.uniform(), s.uniform()};
  const double base = levina_bickel<2>(x, 5);
  double worst_scale = 0.0, worst_rot = 0.0;
  for (double c : {0.5, 2.0, 3.7, 1e3}) {
    auto y = x;
    for (auto& p : y) p = {c * p[0], c * p[1]};
    worst_scale = std::max(worst_scale, std::abs(levina_bickel<2>(y, 5) - base));
  }
  for (double th : {0.3, 1.1, 2.9}) {
    auto y = x;
    const double cs = std::cos(th), sn = std::sin(th);
    for (auto& p : y) p = {cs * p[0] - sn * p[1] + 0.25, sn * p[0] + cs * p[1] - 1.5};
    worst_rot = std::max(worst_rot, std::abs(levina_bickel<2>(y, 5) - base));
  }
  rec.value("scale_gap", worst_scale);
  rec.value("rotation_gap", worst_rot);
  rec.expect(worst_scale <= 1e-12, fmt("scale invariance: max gap %.3g (<= 1e-12)", worst_scale));
  rec.expect(worst_rot <= 1e-12, fmt("rigid-motion invariance: max gap %.3g (<= 1e-12)", worst_rot));

  const Stream runs(s.fork_key());
  const auto est = parallel_map(50, threads, [&](std::size_t r) {
    Stream q = runs.derive(r);
    std::vector<Point<2>> u(2000);
    for (auto& p : u) p = {q.uniform(), q.uniform()};
    return levina_bickel<2>(u, 10);
  });
  const double mean = sample_moments(est).mean;
  rec.value("uniform_square_mean", mean);
  rec.expect(mean >= 1.6 && mean <= 2.4, fmt("uniform square, n=2000, k=10, 50 runs: mean %.4f in [1.6, 2.4]", mean));
  return rec.finish();
}

}  // namespace suites

/// The acceptance suites in order. `determinism` is handled by the caller.
inline const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> list = {
      {"c1", "covariance identity (exhaustive)", suites::covariance_identity},
      {"c2", "E(T) = sigma^2", suites::mean_T_equals_variance},
      {"c3", "Monte Carlo T is unbiased", suites::mc_T_unbiased},
      {"c4", "quadratic-form conditional mean closed form", suites::quadratic_form_closed_form},
      {"c5", "quadratic-form rate", suites::quadratic_form_rate},
      {"c6", "occupancy rate and interaction rule", suites::occupancy_rate},
      {"c7", "coverage rate, area estimators and interaction rule", suites::coverage_checks},
      {"c8", "nearest-neighbor rule", suites::nearest_neighbor_checks},
      {"c9", "Stein equation solver", suites::stein_solver},
      {"c10", "Wasserstein estimator calibration", suites::wasserstein_calibration},
      {"c11", "intrinsic-dimension estimator", suites::levina_bickel_checks},
  };
  return list;
}

inline const Suite* find_suite(const std::string& id) {
  for (const auto& s : all_suites())
    if (s.id == id) return &s;
  return nullptr;
}

/// Reruns every suite at two thread counts and compares record dumps byte for byte.
inline SuiteResult determinism_check(std::uint64_t seed, unsigned threads_a = 1, unsigned threads_b = 8) {
  suites::Recorder rec;
  for (const auto& s : all_suites()) {
    const auto a = s.run(seed, threads_a);
    const auto b = s.run(seed, threads_b);
    rec.expect(a.records == b.records, s.id + ": records identical at " + std::to_string(threads_a) + " and " +
                                           std::to_string(threads_b) + " threads (" +
                                           std::to_string(a.records.size()) + " bytes)");
  }
  return rec.finish();
}

}  // namespace stein::harness
