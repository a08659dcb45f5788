#pragma once

// Brute-force reference computations and seeded generators for the unit tests.
// Nothing here calls the routine it is used to check.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace oracle {

/// Small seeded generator independent of the library's streams.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  int sign() { return below(2) ? 1 : -1; }
  double normal() { return std::normal_distribution<double>()(eng_); }
  std::vector<int> signs(std::size_t n) {
    std::vector<int> v(n);
    for (auto& x : v) x = sign();
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

inline double binom(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// T by its defining subset sum, enumerating A as bitmasks.
template <class V, class F>
double subset_sum_T(const F& f, const std::vector<V>& x, const std::vector<V>& xp) {
  const std::size_t n = x.size();
  auto mix = [&](std::uint64_t mask) {
    std::vector<V> z = x;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) z[i] = xp[i];
    return z;
  };
  double total = 0.0;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
    const std::size_t size = static_cast<std::size_t>(std::popcount(a));
    if (size == n) continue;
    const double w = 1.0 / (binom(n, size) * static_cast<double>(n - size));
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t bit = std::uint64_t{1} << j;
      if (a & bit) continue;
      const double dx = f(mix(0)) - f(mix(bit));
      const double da = f(mix(a)) - f(mix(a | bit));
      total += w * dx * da;
    }
  }
  return 0.5 * total;
}

/// Mean of |sorted z_i - Phi^{-1}((i - 1/2)/m)| with the quantile found by bisection.
inline double quantile_coupling_w1(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  const std::size_t m = z.size();
  auto cdf = [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < p ? lo : hi) = mid;
    }
    total += std::abs(z[i] - 0.5 * (lo + hi));
  }
  return total / static_cast<double>(m);
}

/// Indices of the `count` nearest points to q (excluding nothing), by full sort.
template <std::size_t D>
std::vector<std::size_t> nearest_by_sort(const std::vector<std::array<double, D>>& pts,
                                         const std::array<double, D>& q, std::size_t count) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto d2 = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t c = 0; c < D; ++c) s += (pts[i][c] - q[c]) * (pts[i][c] - q[c]);
    return s;
  };
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return d2(a) != d2(b) ? d2(a) < d2(b) : a < b;
  });
  idx.resize(std::min(count, idx.size()));
  return idx;
}

/// Rank of j as seen from i: 1 + number of l outside {i, j} strictly closer to x_i than x_j.
template <std::size_t D>
std::size_t rank_by_count(const std::vector<std::array<double, D>>& pts, std::size_t i, std::size_t j) {
  auto d2 = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t c = 0; c < D; ++c) s += (pts[a][c] - pts[b][c]) * (pts[a][c] - pts[b][c]);
    return s;
  };
  std::size_t r = 1;
  for (std::size_t l = 0; l < pts.size(); ++l)
    if (l != j && l != i && d2(i, l) < d2(i, j)) ++r;
  return r;
}

/// Total length of a union of closed intervals [c - e, c + e] clipped to [0, 1].
inline double union_length(std::vector<double> centers, double e) {
  std::sort(centers.begin(), centers.end());
  double total = 0.0, lo = 0.0, hi = -1.0;
  bool open = false;
  for (double c : centers) {
    const double a = std::max(0.0, c - e), b = std::min(1.0, c + e);
    if (open && a <= hi) {
      hi = std::max(hi, b);
    } else {
      if (open) total += hi - lo;
      lo = a;
      hi = b;
      open = true;
    }
  }
  if (open) total += hi - lo;
  return total;
}

/// Number of empty boxes, by counting occupancy.
inline double empty_boxes(const std::vector<int>& labels, std::size_t m) {
  std::vector<int> count(m, 0);
  for (int v : labels) ++count[static_cast<std::size_t>(v)];
  return static_cast<double>(std::count(count.begin(), count.end(), 0));
}

/// Least squares slope and intercept of y on x.
inline std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace oracle
