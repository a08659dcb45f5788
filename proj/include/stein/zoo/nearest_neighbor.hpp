#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stein/error.hpp"
#include "stein/graph.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"
#include "stein/zoo/kdtree.hpp"

// Statistics built from k-nearest-neighbor structure of n points, their
// co-neighborhood interaction rules, and the intrinsic-dimension estimator.

namespace stein {

/// #{l : |x_i - x_l| < |x_i - x_j|}, counting l = i; the nearest neighbor has rank 1.
template <std::size_t D>
std::size_t nn_rank(std::span<const Point<D>> x, std::size_t i, std::size_t j) {
  if (i == j) throw InvalidArgumentError("rank needs i != j");
  if (i >= x.size() || j >= x.size()) throw InvalidArgumentError("rank index out of range");
  const double dij = squared_distance(x[i], x[j]);
  std::size_t rank = 0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (l == j) continue;
    const double d = squared_distance(x[i], x[l]);
    if (d == dij) throw TieError("tied distances from point " + std::to_string(i));
    rank += d < dij;
  }
  return rank;
}

/// True when some point sees two others at exactly equal distance, or two points coincide.
template <std::size_t D>
bool has_distance_ties(std::span<const Point<D>> x) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d.clear();
    for (std::size_t l = 0; l < x.size(); ++l)
      if (l != i) d.push_back(squared_distance(x[i], x[l]));
    std::sort(d.begin(), d.end());
    if (!d.empty() && d.front() == 0.0) return true;
    if (std::adjacent_find(d.begin(), d.end()) != d.end()) return true;
  }
  return false;
}

/// Draws configurations until one is tie-free; counts rejections.
template <std::size_t D>
std::vector<Point<D>> draw_tie_free(const CoordinateModel<Point<D>>& model, Stream& stream,
                                    std::size_t& rejections, std::size_t max_attempts = 1000) {
  for (std::size_t a = 0; a < max_attempts; ++a) {
    auto x = model.draw(stream);
    if (!has_distance_ties<D>(x)) return x;
    ++rejections;
  }
  throw TieError("no tie-free configuration after repeated draws");
}

/// For each point l, the point itself followed by its `reach` nearest
/// neighbors in increasing distance (fewer when n <= reach). Entry p of row l
/// has rank p from l. Throws TieError when a tie makes any row ambiguous.
template <std::size_t D>
std::vector<std::vector<Neighbor>> neighbor_lists(std::span<const Point<D>> x, std::size_t reach) {
  const KdTree<D> tree(x);
  std::vector<std::vector<Neighbor>> rows(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) {
    auto row = tree.nearest(x[l], reach + 2);
    for (std::size_t p = 1; p < row.size(); ++p)
      if (row[p].first == row[p - 1].first) throw TieError("tied neighbor distances at point " + std::to_string(l));
    if (row.front().second != l) throw TieError("coincident points");
    if (row.size() > reach + 1) row.resize(reach + 1);
    rows[l] = std::move(row);
  }
  return rows;
}

/// Edge {i, j} iff some l has rank <= reach to both (l itself counts at rank 0).
template <std::size_t D>
IndexGraph co_neighborhood_graph(std::span<const Point<D>> x, std::size_t reach) {
  const auto rows = neighbor_lists<D>(x, reach);
  std::vector<std::vector<std::uint32_t>> groups(rows.size());
  for (std::size_t l = 0; l < rows.size(); ++l)
    for (const auto& nb : rows[l]) groups[l].push_back(nb.second);
  return IndexGraph::from_cliques(x.size(), groups);
}

/// Base rule: co-neighborhoods of reach k+1.
template <std::size_t D>
GraphicalRule<Point<D>> nn_rule(std::size_t k) {
  if (k == 0) throw InvalidArgumentError("k must be at least 1");
  return {"nearest-neighbor(k=" + std::to_string(k) + ")",
          [k](std::span<const Point<D>> x) { return co_neighborhood_graph<D>(x, k + 1); }, true, {}};
}

/// Extension on n+4 points: co-neighborhoods of reach k+5.
template <std::size_t D>
GraphicalRule<Point<D>> nn_rule_ext(std::size_t k) {
  if (k == 0) throw InvalidArgumentError("k must be at least 1");
  auto base = nn_rule<D>(k);
  return {"nearest-neighbor-ext(k=" + std::to_string(k) + ")",
          [k](std::span<const Point<D>> x) { return co_neighborhood_graph<D>(x, k + 5); }, true, base.name};
}

/// {l : d_x(l, j) <= k}, which contains j itself.
template <std::size_t D>
std::vector<std::size_t> nn_neighborhood(std::span<const Point<D>> x, std::size_t j, std::size_t k) {
  if (j >= x.size()) throw InvalidArgumentError("index out of range");
  const auto rows = neighbor_lists<D>(x, k);
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < rows.size(); ++l)
    for (const auto& nb : rows[l])
      if (nb.second == j) {
        out.push_back(l);
        break;
      }
  return out;
}

/// |N_j(x) u N_j(x^j)| where x^j replaces coordinate j by x'_j.
template <std::size_t D>
std::size_t nn_neighborhood_change_bound(std::span<const Point<D>> x, std::span<const Point<D>> x_prime,
                                         std::size_t j, std::size_t k) {
  if (x.size() != x_prime.size()) throw InvalidArgumentError("configurations differ in length");
  std::vector<Point<D>> xj(x.begin(), x.end());
  xj[j] = x_prime[j];
  auto a = nn_neighborhood<D>(x, j, k);
  const auto b = nn_neighborhood<D>(xj, j, k);
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return static_cast<std::size_t>(std::unique(a.begin(), a.end()) - a.begin());
}

/// Minimum number of 60-degree cones covering R^d; only d = 1, 2 are known here.
inline std::size_t alpha_cones(std::size_t d) {
  if (d == 1) return 2;
  if (d == 2) return 6;
  throw DomainError("no cone-covering number shipped for d = " + std::to_string(d) +
                    "; supply an upper bound explicitly");
}

/// Per-point summands f_l that depend on x_l and its k nearest neighbors only.
enum class NnFunctional {
  kth_within_radius,    // 1{D_lk <= radius}
  scaled_kth_distance,  // n^{1/D} D_lk
  levina_bickel_term    // inverse mean log-ratio of x_l, divided by n
};

inline const char* to_string(NnFunctional f) {
  switch (f) {
    case NnFunctional::kth_within_radius: return "kth_within_radius";
    case NnFunctional::scaled_kth_distance: return "scaled_kth_distance";
    case NnFunctional::levina_bickel_term: return "levina_bickel_term";
  }
  return "?";
}

inline NnFunctional parse_nn_functional(const std::string& s) {
  if (s == "kth_within_radius") return NnFunctional::kth_within_radius;
  if (s == "scaled_kth_distance") return NnFunctional::scaled_kth_distance;
  if (s == "levina_bickel_term") return NnFunctional::levina_bickel_term;
  throw ConfigError("unknown nearest-neighbor functional '" + s + "'");
}

template <std::size_t D>
class NnModel {
 public:
  NnModel(std::size_t n, std::size_t k, NnFunctional functional, double radius = 0.0)
      : n_(n), k_(k), functional_(functional), radius_(radius) {
    if (k_ == 0) throw InvalidArgumentError("k must be at least 1");
    if (n_ < k_ + 1) throw InvalidArgumentError("need n >= k + 1 points");
    if (functional_ == NnFunctional::levina_bickel_term && k_ < 2)
      throw InvalidArgumentError("the log-ratio functional needs k >= 2");
    if (functional_ == NnFunctional::kth_within_radius && !(radius_ > 0.0))
      throw InvalidArgumentError("indicator functional needs a positive radius");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  NnFunctional functional() const noexcept { return functional_; }
  double radius() const noexcept { return radius_; }

  /// f_l for every l. Configurations may have any length >= k+1.
  std::vector<double> local_terms(std::span<const Point<D>> x) const {
    const auto rows = neighbor_lists<D>(x, k_);
    const double m = static_cast<double>(x.size());
    std::vector<double> out(x.size());
    for (std::size_t l = 0; l < x.size(); ++l) {
      const auto& row = rows[l];
      if (row.size() < k_ + 1) throw InvalidArgumentError("fewer than k neighbors");
      const double dk = std::sqrt(row[k_].first);
      switch (functional_) {
        case NnFunctional::kth_within_radius: out[l] = dk <= radius_ ? 1.0 : 0.0; break;
        case NnFunctional::scaled_kth_distance:
          out[l] = std::pow(m, 1.0 / static_cast<double>(D)) * dk;
          break;
        case NnFunctional::levina_bickel_term: {
          double s = 0.0;
          for (std::size_t j = 1; j < k_; ++j) s += std::log(dk / std::sqrt(row[j].first));
          out[l] = (static_cast<double>(k_ - 1) / s) / m;
          break;
        }
      }
    }
    return out;
  }

  double statistic(std::span<const Point<D>> x) const {
    double w = 0.0;
    for (double v : local_terms(x)) w += v;
    return w;
  }

  CoordinateModel<Point<D>> coordinate_model() const {
    auto self = std::make_shared<const NnModel>(*this);
    return CoordinateModel<Point<D>>(
        n_,
        [](Stream& s) {
          Point<D> p;
          for (auto& c : p) c = s.uniform();
          return p;
        },
        [self](std::span<const Point<D>> x) { return self->statistic(x); });
  }

 private:
  std::size_t n_;
  std::size_t k_;
  NnFunctional functional_;
  double radius_;
};

/// (1/n) sum_l [ (1/(k-1)) sum_{j<k} log(D_lk / D_lj) ]^{-1}.
template <std::size_t D>
double levina_bickel(std::span<const Point<D>> x, std::size_t k) {
  if (k < 2) throw InvalidArgumentError("estimator needs k >= 2");
  if (x.size() < k + 1) throw InvalidArgumentError("estimator needs n >= k + 1");
  const auto rows = neighbor_lists<D>(x, k);
  double total = 0.0;
  for (const auto& row : rows) {
    const double dk = std::sqrt(row[k].first);
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += std::log(dk / std::sqrt(row[j].first));
    total += static_cast<double>(k - 1) / s;
  }
  return total / static_cast<double>(x.size());
}

/// C a^3 k^4 g^{2/p} / (sigma2 n^{(p-8)/(2p)}) + C a^3 k^3 g^{3/p} / (sigma^3 n^{(p-6)/(2p)}),
/// with g = gamma_p. For p = infinity pass gamma_p as the sup bound of |f_l|;
/// the roots g^{1/p} are then read as that bound and the n-exponents become 1/2.
inline BoundReport theorem34_bound(double alpha_d, std::size_t k, double gamma_p, double p, double sigma2,
                                   std::size_t n, double constant_C = 1.0) {
  if (!(p >= 8.0)) throw MomentOrderError("moment order p must be at least 8");
  if (!(sigma2 > 0.0)) throw DegenerateStatisticError("sigma^2 must be positive");
  if (!(constant_C > 0.0)) throw InvalidArgumentError("universal constant must be positive");
  if (!(gamma_p >= 0.0) || !std::isfinite(gamma_p)) throw InvalidArgumentError("gamma_p must be finite and nonnegative");
  const bool inf = std::isinf(p);
  const double root = inf ? gamma_p : std::pow(gamma_p, 1.0 / p);
  const double e1 = inf ? 0.5 : (p - 8.0) / (2.0 * p);
  const double e2 = inf ? 0.5 : (p - 6.0) / (2.0 * p);
  const double a3 = alpha_d * alpha_d * alpha_d;
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  BoundReport r;
  r.sigma2 = sigma2;
  r.variance_level = VarianceLevel::given_X;
  r.modulo_constant = true;
  r.constant_C = constant_C;
  r.variance_term = constant_C * a3 * std::pow(kk, 4) * root * root / (sigma2 * std::pow(nn, e1));
  r.third_moment_term = constant_C * a3 * std::pow(kk, 3) * root * root * root / (std::pow(sigma2, 1.5) * std::pow(nn, e2));
  r.total = r.variance_term + r.third_moment_term;
  return r;
}

}  // namespace stein
