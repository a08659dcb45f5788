#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "stein/error.hpp"
#include "stein/random.hpp"

namespace stein {

inline constexpr double kSqrtTwoOverPi = 0.79788456080286535588;
inline constexpr double kInvSqrtTwoPi = 0.39894228040143267794;

inline double normal_pdf(double x) { return kInvSqrtTwoPi * std::exp(-0.5 * x * x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Phi^{-1}(p) for p in (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

// ---------------------------------------------------------------------------
// Stein equation  phi'(x) - x phi(x) = h(x) - E h(Z).

/// A Lipschitz test function with its a.e. derivative. `kinks` lists the
/// points where the derivative jumps; quadrature splits there.
struct LipschitzFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double lipschitz = 1.0;
  std::vector<double> kinks;
  std::string name;
};

struct SteinValue {
  double phi = 0.0;
  double dphi = 0.0;
};

namespace detail {

// Gaussian tails beyond this are below double underflow.
inline constexpr double kTailCutoff = 40.0;
inline constexpr double kQuadratureTolerance = 1e-11;
inline constexpr double kAcceptableError = 1e-9;

template <class F>
double integrate_pieces(const F& f, std::vector<double> breaks, double lo, double hi) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0, error_total = 0.0, l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (a < lo || b > hi || b <= a) continue;
    double err = 0.0, l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 15, kQuadratureTolerance, &err, &l1);
    error_total += err;
    l1_total += l1;
  }
  if (error_total > kAcceptableError * std::max(1.0, l1_total))
    throw SolverAccuracyError("Stein solver quadrature did not converge", error_total);
  return total;
}

}  // namespace detail

/// E h(Z) by piecewise adaptive Gauss-Kronrod quadrature.
inline double gaussian_expectation(const LipschitzFunction& h) {
  std::vector<double> breaks = h.kinks;
  for (double b : {-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0}) breaks.push_back(b);
  return detail::integrate_pieces([&](double t) { return h.value(t) * normal_pdf(t); }, breaks,
                                  -detail::kTailCutoff, detail::kTailCutoff);
}

/// Solution of the Stein equation for h. For x <= 0 it uses
///   phi(x)  =  int_0^inf e^{xs - s^2/2} g(x - s) ds,
/// for x > 0
///   phi(x)  = -int_0^inf e^{-xs - s^2/2} g(x + s) ds,
/// with g = h - E h(Z): the left and right integral representations with the
/// e^{x^2/2} factor moved inside, so nothing overflows. phi' is evaluated by
/// differentiating under the integral sign, independently of the equation.
class SteinSolution {
 public:
  SteinSolution(LipschitzFunction h, double gauss_mean_h)
      : h_(std::move(h)), gauss_mean_h_(gauss_mean_h) {}

  const LipschitzFunction& h() const noexcept { return h_; }
  double gauss_mean_h() const noexcept { return gauss_mean_h_; }

  SteinValue evaluate(double x) const {
    const double sign = x <= 0.0 ? 1.0 : -1.0;  // direction along which the integral runs
    const double c = std::abs(x);
    // Shifted kinks: s with x - sign*s == kink, s > 0.
    std::vector<double> breaks{0.5, 1.0, 2.0, 4.0, 8.0};
    for (double k : h_.kinks) {
      const double s = sign * (x - k);
      if (s > 0.0) breaks.push_back(s);
    }
    const double upper = detail::kTailCutoff;
    auto point = [&](double s) { return x - sign * s; };
    auto weight = [&](double s) { return std::exp(-c * s - 0.5 * s * s); };
    const double phi_int = detail::integrate_pieces(
        [&](double s) { return weight(s) * (h_.value(point(s)) - gauss_mean_h_); }, breaks, 0.0, upper);
    const double dphi_a = detail::integrate_pieces(
        [&](double s) { return s * weight(s) * (h_.value(point(s)) - gauss_mean_h_); }, breaks, 0.0,
        upper);
    const double dphi_b = detail::integrate_pieces(
        [&](double s) { return weight(s) * h_.derivative(point(s)); }, breaks, 0.0, upper);
    SteinValue v;
    v.phi = sign * phi_int;
    v.dphi = dphi_a + sign * dphi_b;
    return v;
  }

  /// phi'' = phi + x phi' + h' (from differentiating the equation).
  double second_derivative(double x) const {
    const auto v = evaluate(x);
    return v.phi + x * v.dphi + h_.derivative(x);
  }

  /// phi'(x) - x phi(x) - (h(x) - E h(Z)).
  double residual(double x) const {
    const auto v = evaluate(x);
    return v.dphi - x * v.phi - (h_.value(x) - gauss_mean_h_);
  }

 private:
  LipschitzFunction h_;
  double gauss_mean_h_;
};

inline SteinSolution stein_solve(LipschitzFunction h, std::optional<double> gauss_mean_h = std::nullopt) {
  if (!h.value || !h.derivative) throw InvalidArgumentError("test function needs value and derivative");
  if (!(h.lipschitz >= 0.0) || !std::isfinite(h.lipschitz))
    throw InvalidArgumentError("Lipschitz constant must be finite");
  const double mean = gauss_mean_h ? *gauss_mean_h : gaussian_expectation(h);
  return SteinSolution(std::move(h), mean);
}

struct SteinConstantReport {
  double max_dphi_ratio = 0.0;   // sup |phi'| / ||h'||
  double max_d2phi_ratio = 0.0;  // sup |phi''| / ||h'||
  double max_residual = 0.0;
};

/// Grid suprema of |phi'| / ||h'|| and |phi''| / ||h'|| over a family of h.
inline SteinConstantReport stein_constant_check(const std::vector<LipschitzFunction>& family,
                                                std::span<const double> grid) {
  SteinConstantReport out;
  for (const auto& h : family) {
    const auto sol = stein_solve(h);
    for (double x : grid) {
      const auto v = sol.evaluate(x);
      const double d2 = v.phi + x * v.dphi + h.derivative(x);
      out.max_residual = std::max(out.max_residual,
                                  std::abs(v.dphi - x * v.phi - (h.value(x) - sol.gauss_mean_h())));
      if (h.lipschitz > 0.0) {
        out.max_dphi_ratio = std::max(out.max_dphi_ratio, std::abs(v.dphi) / h.lipschitz);
        out.max_d2phi_ratio = std::max(out.max_d2phi_ratio, std::abs(d2) / h.lipschitz);
      }
    }
  }
  return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

/// Random piecewise-linear function with slopes in [-1, 1] and at least one
/// slope of magnitude exactly 1.
inline LipschitzFunction random_piecewise_linear(Stream& stream) {
  const std::size_t pieces = 2 + static_cast<std::size_t>(stream.below(5));
  std::vector<double> kinks(pieces - 1);
  for (auto& k : kinks) k = stream.uniform(-3.0, 3.0);
  std::sort(kinks.begin(), kinks.end());
  std::vector<double> slopes(pieces);
  for (auto& s : slopes) s = stream.uniform(-1.0, 1.0);
  slopes[stream.below(pieces)] = stream.rademacher();
  const double offset = stream.uniform(-1.0, 1.0);
  // Values at kinks for continuity.
  std::vector<double> at(pieces - 1);
  at[0] = offset;
  for (std::size_t i = 1; i < at.size(); ++i) at[i] = at[i - 1] + slopes[i] * (kinks[i] - kinks[i - 1]);
  auto piece = [kinks](double x) {
    return static_cast<std::size_t>(std::upper_bound(kinks.begin(), kinks.end(), x) - kinks.begin());
  };
  LipschitzFunction h;
  h.value = [=](double x) {
    const auto p = piece(x);
    if (p == 0) return at[0] + slopes[0] * (x - kinks[0]);
    return at[p - 1] + slopes[p] * (x - kinks[p - 1]);
  };
  h.derivative = [=](double x) { return slopes[piece(x)]; };
  h.lipschitz = 1.0;
  h.kinks = kinks;
  h.name = "piecewise_linear";
  return h;
}

// ---------------------------------------------------------------------------
// Empirical distance to the standard Gaussian.

enum class StandardizationMode { known_moments, empirical_moments };

struct Standardization {
  StandardizationMode mode = StandardizationMode::empirical_moments;
  double mean = 0.0;
  double std = 1.0;

  static Standardization known(double mean, double std) {
    return {StandardizationMode::known_moments, mean, std};
  }
  static Standardization empirical() { return {}; }
};

inline const char* to_string(StandardizationMode m) {
  return m == StandardizationMode::known_moments ? "known_moments" : "empirical_moments";
}

struct EmpiricalDistance {
  double w1 = 0.0;
  std::size_t sample_size = 0;
  StandardizationMode standardization = StandardizationMode::empirical_moments;
  double mean_used = 0.0;
  double std_used = 1.0;
};

/// Resolves the (mean, std) a standardization will use on `samples`.
inline Standardization resolve_standardization(std::span<const double> samples, Standardization s) {
  if (s.mode == StandardizationMode::known_moments) {
    if (!(s.std > 0.0)) throw DegenerateSampleError("known standard deviation must be positive");
    return s;
  }
  if (samples.size() < 2) throw DegenerateSampleError("empirical standardization needs >= 2 samples");
  const auto m = sample_moments(samples);
  if (!(m.variance > 0.0)) throw DegenerateSampleError("sample has zero variance");
  s.mean = m.mean;
  s.std = std::sqrt(m.variance);
  return s;
}

/// (x - mean) / std with known or empirical (unbiased) moments.
inline std::vector<double> standardize(std::span<const double> samples, Standardization s) {
  s = resolve_standardization(samples, s);
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] - s.mean) / s.std;
  return out;
}

/// Phi^{-1}((i - 1/2) / m), i = 1..m.
inline std::vector<double> gaussian_quantile_grid(std::size_t m) {
  std::vector<double> q(m);
  for (std::size_t i = 0; i < m; ++i)
    q[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(m));
  return q;
}

/// Quantile-coupling estimate m^{-1} sum_i |s_(i) - Phi^{-1}((i - 1/2)/m)|.
inline EmpiricalDistance wasserstein1_to_gaussian(std::span<const double> samples,
                                                  Standardization standardization) {
  if (samples.size() < 2) throw DegenerateSampleError("W1 estimate needs >= 2 samples");
  const auto s = resolve_standardization(samples, standardization);
  auto z = standardize(samples, s);
  std::sort(z.begin(), z.end());
  const auto q = gaussian_quantile_grid(z.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += std::abs(z[i] - q[i]);
  EmpiricalDistance d;
  d.w1 = acc / static_cast<double>(z.size());
  d.sample_size = z.size();
  d.standardization = s.mode;
  d.mean_used = s.mean;
  d.std_used = s.std;
  return d;
}

/// Bootstrap standard-deviation proxy for the W1 estimate: resample with
/// replacement, re-estimate with the same standardization rule.
inline double wasserstein1_bootstrap_proxy(std::span<const double> samples,
                                           Standardization standardization, std::size_t resamples,
                                           Stream& stream) {
  if (resamples < 2) throw InvalidArgumentError("bootstrap needs >= 2 resamples");
  const std::size_t m = samples.size();
  const auto q = gaussian_quantile_grid(m);
  std::vector<double> estimates;
  estimates.reserve(resamples);
  std::vector<double> draw(m);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& v : draw) v = samples[stream.below(m)];
    Standardization s;
    try {
      s = resolve_standardization(draw, standardization);
    } catch (const DegenerateSampleError&) {
      continue;
    }
    for (auto& v : draw) v = (v - s.mean) / s.std;
    std::sort(draw.begin(), draw.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += std::abs(draw[i] - q[i]);
    estimates.push_back(acc / static_cast<double>(m));
  }
  if (estimates.size() < 2) return 0.0;
  return std::sqrt(sample_moments(estimates).variance);
}

}  // namespace stein
