#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "stein/error.hpp"
#include "stein/graph.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"
#include "stein/zoo/kdtree.hpp"

// Measure of the union of closed eps-balls around n uniform points in the
// unit cube [0,1]^D, intersected with the cube.

namespace stein {

/// Volume of the unit ball in R^D.
inline double unit_ball_volume(std::size_t d) {
  return std::pow(std::numbers::pi, 0.5 * static_cast<double>(d)) / std::tgamma(0.5 * static_cast<double>(d) + 1.0);
}

namespace detail {

/// Uniform bucket grid over the unit cube; cell side >= reach, so every point
/// within `reach` of q lies in q's cell or an adjacent one.
template <std::size_t D>
class CellHash {
 public:
  CellHash(std::span<const Point<D>> points, double reach) : points_(points) {
    const double cap = std::floor(std::pow(1e6, 1.0 / static_cast<double>(D)));
    cells_ = static_cast<std::size_t>(std::clamp(std::floor(1.0 / reach), 1.0, cap));
    std::size_t total = 1;
    for (std::size_t c = 0; c < D; ++c) total *= cells_;
    start_.assign(total + 1, 0);
    std::vector<std::size_t> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = flat(coords(points[i]));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    members_.resize(points.size());
    auto fill = start_;
    for (std::size_t i = 0; i < points.size(); ++i) members_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  /// Calls fn(index) for candidates near q; stops early when fn returns true.
  template <class Fn>
  bool any_near(const Point<D>& q, Fn&& fn) const {
    const auto base = coords(q);
    std::array<int, D> off;
    off.fill(-1);
    while (true) {
      bool valid = true;
      std::array<std::size_t, D> c;
      for (std::size_t k = 0; k < D; ++k) {
        const long v = static_cast<long>(base[k]) + off[k];
        if (v < 0 || v >= static_cast<long>(cells_)) {
          valid = false;
          break;
        }
        c[k] = static_cast<std::size_t>(v);
      }
      if (valid) {
        const auto f = flat(c);
        for (std::size_t m = start_[f]; m < start_[f + 1]; ++m)
          if (fn(members_[m])) return true;
      }
      std::size_t k = 0;
      while (k < D && ++off[k] > 1) off[k++] = -1;
      if (k == D) return false;
    }
  }

 private:
  std::array<std::size_t, D> coords(const Point<D>& p) const {
    std::array<std::size_t, D> c;
    for (std::size_t k = 0; k < D; ++k) {
      const double v = std::floor(p[k] * static_cast<double>(cells_));
      c[k] = static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(cells_ - 1)));
    }
    return c;
  }
  std::size_t flat(const std::array<std::size_t, D>& c) const {
    std::size_t f = 0;
    for (std::size_t k = D; k-- > 0;) f = f * cells_ + c[k];
    return f;
  }

  std::span<const Point<D>> points_;
  std::size_t cells_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> members_;
};

/// Tightens a floating-point guess [lo, hi] of the cells inside a convex
/// slice using exact membership tests.
template <class Inside>
std::pair<long, long> tighten(long lo, long hi, long limit, Inside&& inside) {
  lo = std::max(0L, lo - 1);
  hi = std::min(limit - 1, hi + 1);
  while (lo <= hi && !inside(lo)) ++lo;
  while (hi >= lo && !inside(hi)) --hi;
  return {lo, hi};
}

}  // namespace detail

/// Counts the cells of an R^D grid whose centers fall inside some ball.
struct GridArea {
  std::size_t resolution = 1024;
};

/// Fraction of fixed uniform probe points inside some ball. The probe set is
/// drawn once from probe_seed, so f(x) and f(x^j) share probes.
struct MonteCarloArea {
  std::size_t samples = 100000;
  std::uint64_t probe_seed = 0x5eed;
};

using AreaEstimator = std::variant<GridArea, MonteCarloArea>;

template <std::size_t D>
class CoverageModel {
 public:
  CoverageModel(std::size_t n, double epsilon, AreaEstimator estimator = GridArea{})
      : n_(n), eps_(epsilon), estimator_(estimator) {
    if (n_ == 0) throw InvalidArgumentError("coverage needs n >= 1");
    if (!(eps_ > 0.0)) throw InvalidArgumentError("radius must be positive");
    if (const auto* g = std::get_if<GridArea>(&estimator_)) {
      if (g->resolution == 0) throw ConfigError("grid resolution must be positive");
    } else {
      const auto& mc = std::get<MonteCarloArea>(estimator_);
      if (mc.samples == 0) throw ConfigError("probe budget must be positive");
      Stream s(mc.probe_seed);
      auto probes = std::make_shared<std::vector<Point<D>>>(mc.samples);
      for (auto& p : *probes)
        for (auto& c : p) c = s.uniform();
      probes_ = std::move(probes);
    }
  }

  std::size_t n() const noexcept { return n_; }
  double epsilon() const noexcept { return eps_; }
  const AreaEstimator& estimator() const noexcept { return estimator_; }

  double area(std::span<const Point<D>> x) const {
    for (const auto& p : x)
      for (double c : p)
        if (!(c >= 0.0 && c <= 1.0)) throw InvalidCoordinateError("point outside the unit cube");
    if (probes_) return probe_area(x);
    const auto r = std::get<GridArea>(estimator_).resolution;
    if constexpr (D <= 2) return sweep_area(x, r);
    else return marked_area(x, r);
  }

  /// Largest excess of one move |Delta_j f| over the supremum ball measure
  /// that the estimator can produce (grid), or a 6-sigma allowance (probes).
  double move_tolerance() const {
    const double vd = unit_ball_volume(D);
    if (const auto* g = std::get_if<GridArea>(&estimator_)) {
      const double half_diag = std::sqrt(static_cast<double>(D)) / (2.0 * static_cast<double>(g->resolution));
      return vd * (std::pow(eps_ + half_diag, static_cast<double>(D)) - std::pow(eps_, static_cast<double>(D)));
    }
    const double p = static_cast<double>(std::get<MonteCarloArea>(estimator_).samples);
    return 6.0 * std::sqrt(vd * std::pow(eps_, static_cast<double>(D)) / p) + 1.0 / p;
  }

  CoordinateModel<Point<D>> coordinate_model() const {
    auto self = std::make_shared<const CoverageModel>(*this);
    return CoordinateModel<Point<D>>(
        n_,
        [](Stream& s) {
          Point<D> p;
          for (auto& c : p) c = s.uniform();
          return p;
        },
        [self](std::span<const Point<D>> x) { return self->area(x); });
  }

 private:
  double probe_area(std::span<const Point<D>> x) const {
    const detail::CellHash<D> hash(x, eps_);
    const double e2 = eps_ * eps_;
    std::size_t hit = 0;
    for (const auto& q : *probes_)
      hit += hash.any_near(q, [&](std::uint32_t i) { return squared_distance(x[i], q) <= e2; });
    return static_cast<double>(hit) / static_cast<double>(probes_->size());
  }

  // D in {1, 2}: per-row interval union.
  double sweep_area(std::span<const Point<D>> x, std::size_t res) const {
    const long R = static_cast<long>(res);
    const double e2 = eps_ * eps_;
    auto center = [&](long c) { return (static_cast<double>(c) + 0.5) / static_cast<double>(res); };
    const std::size_t rows = D == 1 ? 1 : res;
    std::vector<std::vector<std::pair<long, long>>> row_intervals(rows);
    for (const auto& p : x) {
      auto add_row = [&](long row, double dy2) {
        const double h2 = e2 - dy2;
        if (h2 < 0.0) return;
        const double h = std::sqrt(h2);
        const long lo = static_cast<long>(std::ceil((p[0] - h) * res - 0.5));
        const long hi = static_cast<long>(std::floor((p[0] + h) * res - 0.5));
        const auto [a, b] = detail::tighten(lo, hi, R, [&](long c) {
          const double dx = center(c) - p[0];
          return dx * dx + dy2 <= e2;
        });
        if (a <= b) row_intervals[static_cast<std::size_t>(row)].emplace_back(a, b);
      };
      if constexpr (D == 1) {
        add_row(0, 0.0);
      } else {
        const long lo = static_cast<long>(std::ceil((p[1] - eps_) * res - 0.5));
        const long hi = static_cast<long>(std::floor((p[1] + eps_) * res - 0.5));
        for (long row = std::max(0L, lo - 1); row <= std::min(R - 1, hi + 1); ++row) {
          const double dy = center(row) - p[1];
          add_row(row, dy * dy);
        }
      }
    }
    std::uint64_t covered = 0;
    for (auto& iv : row_intervals) {
      if (iv.empty()) continue;
      std::sort(iv.begin(), iv.end());
      long cur_lo = iv[0].first, cur_hi = iv[0].second;
      for (std::size_t k = 1; k < iv.size(); ++k) {
        if (iv[k].first > cur_hi + 1) {
          covered += static_cast<std::uint64_t>(cur_hi - cur_lo + 1);
          cur_lo = iv[k].first;
          cur_hi = iv[k].second;
        } else {
          cur_hi = std::max(cur_hi, iv[k].second);
        }
      }
      covered += static_cast<std::uint64_t>(cur_hi - cur_lo + 1);
    }
    return static_cast<double>(covered) / std::pow(static_cast<double>(res), static_cast<double>(D));
  }

  // General D: mark every cell whose center lies in some ball.
  double marked_area(std::span<const Point<D>> x, std::size_t res) const {
    std::size_t total = 1;
    for (std::size_t c = 0; c < D; ++c) total *= res;
    if (total > (std::size_t{1} << 31)) throw ConfigError("grid too fine for this dimension");
    std::vector<char> mark(total, 0);
    const double e2 = eps_ * eps_;
    for (const auto& p : x) {
      std::array<long, D> lo, hi;
      bool empty = false;
      for (std::size_t k = 0; k < D; ++k) {
        lo[k] = std::max(0L, static_cast<long>(std::floor((p[k] - eps_) * res - 0.5)));
        hi[k] = std::min(static_cast<long>(res) - 1, static_cast<long>(std::ceil((p[k] + eps_) * res - 0.5)));
        empty = empty || lo[k] > hi[k];
      }
      if (empty) continue;
      auto c = lo;
      while (true) {
        double d2 = 0.0;
        std::size_t f = 0;
        for (std::size_t k = D; k-- > 0;) {
          const double t = (static_cast<double>(c[k]) + 0.5) / static_cast<double>(res) - p[k];
          d2 += t * t;
          f = f * res + static_cast<std::size_t>(c[k]);
        }
        if (d2 <= e2) mark[f] = 1;
        std::size_t k = 0;
        while (k < D && ++c[k] > hi[k]) {
          c[k] = lo[k];
          ++k;
        }
        if (k == D) break;
      }
    }
    std::size_t covered = 0;
    for (char m : mark) covered += static_cast<std::size_t>(m);
    return static_cast<double>(covered) / static_cast<double>(total);
  }

  std::size_t n_;
  double eps_;
  AreaEstimator estimator_;
  std::shared_ptr<const std::vector<Point<D>>> probes_;
};

template <std::size_t D>
double cov_statistic(const CoverageModel<D>& model, std::span<const Point<D>> x) {
  return model.area(x);
}

/// Edge {i, j} iff |x_i - x_j| <= 2 eps (closed).
template <std::size_t D>
GraphicalRule<Point<D>> cov_rule(double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("radius must be positive");
  return {"coverage",
          [epsilon](std::span<const Point<D>> x) {
            const double reach = 2.0 * epsilon;
            const double r2 = reach * reach;
            const detail::CellHash<D> hash(x, reach);
            std::vector<IndexGraph::Edge> edges;
            for (std::size_t i = 0; i < x.size(); ++i)
              hash.any_near(x[i], [&](std::uint32_t j) {
                if (j > i && squared_distance(x[i], x[j]) <= r2)
                  edges.emplace_back(static_cast<std::uint32_t>(i), j);
                return false;
              });
            return IndexGraph(x.size(), std::move(edges));
          },
          true,
          {}};
}

/// Supremum measure of one ball for the uniform law: the interior value V_D eps^D.
inline double coverage_M_eps(std::size_t d, double epsilon) {
  return unit_ball_volume(d) * std::pow(epsilon, static_cast<double>(d));
}

/// P(|X_1 - X_2| <= 2 eps) for uniform points, by simulation.
template <std::size_t D>
Estimate coverage_p_eps(double epsilon, std::size_t reps, Stream& stream) {
  if (reps < 2) throw InvalidArgumentError("p_eps estimate needs reps >= 2");
  const double r2 = 4.0 * epsilon * epsilon;
  std::vector<double> hits(reps);
  for (auto& h : hits) {
    Point<D> a, b;
    for (auto& c : a) c = stream.uniform();
    for (auto& c : b) c = stream.uniform();
    h = squared_distance(a, b) <= r2 ? 1.0 : 0.0;
  }
  return estimate_mean(hits);
}

/// C sqrt(n) M^2 (1 + n p) / sigma2 + n M^3 / (2 sigma^3).
inline BoundReport prop33_bound(double M_eps, double p_eps, double sigma_eps2, std::size_t n,
                                double constant_C = 1.0) {
  if (!(sigma_eps2 > 0.0)) throw DegenerateStatisticError("coverage variance must be positive");
  if (!(constant_C > 0.0)) throw InvalidArgumentError("universal constant must be positive");
  const double nn = static_cast<double>(n);
  BoundReport r;
  r.sigma2 = sigma_eps2;
  r.variance_level = VarianceLevel::given_X;
  r.modulo_constant = true;
  r.constant_C = constant_C;
  r.variance_term = constant_C * std::sqrt(nn) * M_eps * M_eps * (1.0 + nn * p_eps) / sigma_eps2;
  r.third_moment_term = nn * std::pow(M_eps, 3) / (2.0 * std::pow(sigma_eps2, 1.5));
  r.total = r.variance_term + r.third_moment_term;
  return r;
}

}  // namespace stein
