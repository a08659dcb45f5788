#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "stein/error.hpp"
#include "stein/harness/experiment.hpp"

namespace stein::harness {

/// Least squares of log(delta) on log(n).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

inline RateFit fit_power_law(std::span<const double> n, std::span<const double> delta) {
  if (n.size() != delta.size()) throw InvalidArgumentError("rate fit inputs differ in length");
  if (n.size() < 3) throw InsufficientDataError("rate fit needs at least 3 points");
  std::vector<double> x(n.size()), y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(delta[i] > 0.0)) throw InsufficientDataError("rate fit needs positive n and delta");
    x[i] = std::log(n[i]);
    y[i] = std::log(delta[i]);
  }
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("rate fit needs at least two distinct n");
  RateFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // A constant response is fitted perfectly by slope 0.
  f.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

inline RateFit fit_rate(std::span<const ExperimentRecord> records) {
  std::vector<double> n, d;
  for (const auto& r : records) {
    n.push_back(static_cast<double>(r.n));
    d.push_back(r.delta.w1);
  }
  return fit_power_law(n, d);
}

}  // namespace stein::harness
