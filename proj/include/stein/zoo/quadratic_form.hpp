#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "stein/error.hpp"
#include "stein/random.hpp"
#include "stein/resample.hpp"
#include "stein/stein_t.hpp"

// W = sum_{i<j} a_ij x_i x_j over Rademacher x.

namespace stein {

/// Dense symmetric matrix in row-major storage.
struct SymmetricMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  explicit SymmetricMatrix(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  SymmetricMatrix squared() const {
    SymmetricMatrix b(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = (*this)(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) b(i, j) += aik * (*this)(k, j);
      }
    return b;
  }

  double frobenius2() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
  }
};

class QuadraticFormModel {
 public:
  /// Accepts any symmetric matrix and zeroes its diagonal.
  explicit QuadraticFormModel(SymmetricMatrix matrix) : a_(std::move(matrix)) {
    if (a_.n == 0) throw InvalidArgumentError("quadratic form needs n >= 1");
    if (a_.a.size() != a_.n * a_.n) throw InvalidArgumentError("matrix storage size mismatch");
    for (std::size_t i = 0; i < a_.n; ++i)
      for (std::size_t j = i + 1; j < a_.n; ++j)
        if (std::abs(a_(i, j) - a_(j, i)) > 1e-12) throw InvalidArgumentError("matrix is not symmetric");
    for (std::size_t i = 0; i < a_.n; ++i) a_(i, i) = 0.0;
    b_ = a_.squared();
    sigma2_ = 0.5 * a_.frobenius2();
  }

  std::size_t n() const noexcept { return a_.n; }
  const SymmetricMatrix& matrix() const noexcept { return a_; }
  /// A^2.
  const SymmetricMatrix& squared() const noexcept { return b_; }
  /// Var(W) = Tr(A^2) / 2.
  double sigma2_exact() const noexcept { return sigma2_; }

  CoordinateModel<int> coordinate_model() const;

 private:
  SymmetricMatrix a_;
  SymmetricMatrix b_;
  double sigma2_ = 0.0;
};

inline void require_rademacher(std::span<const int> x, std::size_t n) {
  if (x.size() != n) throw InvalidCoordinateError("coordinate vector has wrong length");
  for (int v : x)
    if (v != 1 && v != -1) throw InvalidCoordinateError("coordinates must be +1 or -1");
}

inline double qf_statistic(const QuadraticFormModel& model, std::span<const int> x) {
  require_rademacher(x, model.n());
  const auto& a = model.matrix();
  double w = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < a.n; ++j) row += a(i, j) * x[j];
    w += x[i] * row;
  }
  return w;
}

/// E(T | X = x) = x^t A^2 x / 2.
inline double qf_cond_T_closed(const QuadraticFormModel& model, std::span<const int> x) {
  require_rademacher(x, model.n());
  const auto& b = model.squared();
  double s = 0.0;
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t j = 0; j < b.n; ++j) s += b(i, j) * x[i] * x[j];
  return 0.5 * s;
}

/// Var(E(T|X)) = sum_{i<j} b_ij^2, with b = A^2.
inline double qf_cond_T_variance(const QuadraticFormModel& model) {
  const auto& b = model.squared();
  double s = 0.0;
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t j = i + 1; j < b.n; ++j) s += b(i, j) * b(i, j);
  return s;
}

/// sqrt(Tr(A^4) / (2 sigma^4)) + 5 / (2 sigma^3) sum_i (sum_j a_ij^2)^{3/2}.
/// Every constant is explicit, so the total is not flagged modulo C.
inline BoundReport prop31_bound(const QuadraticFormModel& model) {
  const double s2 = model.sigma2_exact();
  if (!(s2 > 0.0)) throw DegenerateStatisticError("quadratic form has zero variance");
  const double tr_a4 = model.squared().frobenius2();
  const auto& a = model.matrix();
  double third = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.n; ++j) row += a(i, j) * a(i, j);
    third += std::pow(row, 1.5);
  }
  BoundReport r;
  r.sigma2 = s2;
  r.variance_level = VarianceLevel::given_X;
  r.modulo_constant = false;
  r.constant_C = 1.0;
  r.variance_term = std::sqrt(tr_a4 / (2.0 * s2 * s2));
  r.third_moment_term = 5.0 / (2.0 * std::pow(s2, 1.5)) * third;
  r.total = r.variance_term + r.third_moment_term;
  return r;
}

inline std::vector<SupportPoint<int>> rademacher_support() { return {{-1, 0.5}, {1, 0.5}}; }

inline CoordinateModel<int> QuadraticFormModel::coordinate_model() const {
  auto self = std::make_shared<const QuadraticFormModel>(*this);
  return CoordinateModel<int>(
      n(), [](Stream& s) { return s.rademacher(); },
      [self](std::span<const int> x) { return qf_statistic(*self, x); }, rademacher_support());
}

/// Block-diagonal matrix of dense 4x4 blocks with entries uniform on [1/2, 1],
/// scaled by n^{-1/2}. A trailing partial block is kept.
inline SymmetricMatrix random_block_matrix(std::size_t n, Stream& stream, std::size_t block = 4) {
  SymmetricMatrix m(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t end = std::min(n, start + block);
    for (std::size_t i = start; i < end; ++i)
      for (std::size_t j = i + 1; j < end; ++j) m(i, j) = m(j, i) = stream.uniform(0.5, 1.0) * scale;
  }
  return m;
}

/// Symmetric matrix with i.i.d. N(0, 1/n) off-diagonal entries.
inline SymmetricMatrix random_goe_matrix(std::size_t n, Stream& stream) {
  SymmetricMatrix m(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = stream.normal() * scale;
  return m;
}

/// Dense symmetric matrix with entries uniform on [-1, 1]; for small-n oracles.
inline SymmetricMatrix random_dense_matrix(std::size_t n, Stream& stream) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = stream.uniform(-1.0, 1.0);
  return m;
}

/// W = sum of n Rademacher signs.
inline CoordinateModel<int> rademacher_sum_model(std::size_t n) {
  return CoordinateModel<int>(
      n, [](Stream& s) { return s.rademacher(); },
      [](std::span<const int> x) {
        double w = 0.0;
        for (int v : x) w += v;
        return w;
      },
      rademacher_support());
}

}  // namespace stein
