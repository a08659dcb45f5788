#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stein/stein_t.hpp"
#include "stein/zoo/occupancy.hpp"
#include "stein/zoo/quadratic_form.hpp"

using namespace stein;

namespace {

CoordinateModel<int> table_model(std::size_t n, oracle::Gen& g) {
  auto table = std::make_shared<std::vector<double>>(std::size_t{1} << n);
  for (auto& v : *table) v = g.uniform(-2, 2);
  return CoordinateModel<int>(
      n, [](Stream& s) { return s.rademacher(); },
      [table](std::span<const int> x) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < x.size(); ++j) m |= std::size_t(x[j] == 1) << j;
        return (*table)[m];
      },
      rademacher_support());
}

}  // namespace

TEST(ExactT, AgreesWithSubsetSumOracle) {
  oracle::Gen g(1);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + g.below(7);
    const auto model = table_model(n, g);
    PairedSample<int> s{g.signs(n), g.signs(n)};
    const double want = oracle::subset_sum_T<int>([&](const std::vector<int>& v) { return model(v); }, s.x, s.x_prime);
    EXPECT_NEAR(exact_T(model, s).value, want, 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(ExactT, LinearStatisticGivesHalfSquaredDifferences) {
  oracle::Gen g(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + g.below(9);
    PairedSample<int> s{g.signs(n), g.signs(n)};
    double want = 0.0;
    for (std::size_t j = 0; j < n; ++j) want += 0.5 * (s.x[j] - s.x_prime[j]) * (s.x[j] - s.x_prime[j]);
    EXPECT_NEAR(exact_T(rademacher_sum_model(n), s).value, want, 1e-10);
  }
}

TEST(ExactT, EqualCoordinatesGiveZero) {
  oracle::Gen g(3);
  const auto model = table_model(6, g);
  const auto x = g.signs(6);
  EXPECT_EQ(exact_T(model, PairedSample<int>{x, x}).value, 0.0);
}

TEST(ExactT, RejectsLargeN) {
  const auto cm = rademacher_sum_model(30);
  PairedSample<int> s{std::vector<int>(30, 1), std::vector<int>(30, 1)};
  EXPECT_THROW(exact_T(cm, s), EnumerationLimitError);
}

TEST(McT, WithinFourStandardErrorsOfExact) {
  oracle::Gen g(4);
  Stream s(4);
  for (int t = 0; t < 10; ++t) {
    const auto model = table_model(7, g);
    PairedSample<int> p{g.signs(7), g.signs(7)};
    const double exact = exact_T(model, p).value;
    const auto mc = mc_T(model, p, 50000, s);
    EXPECT_LE(std::abs(mc.value - exact), 4 * mc.std_error + 1e-12);
  }
}

TEST(CovIdentity, HoldsForRandomTablesAndSelfCovarianceIsMeanT) {
  oracle::Gen g(5);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto model = table_model(n, g);
    const auto other = table_model(n, g);
    const auto r = cov_identity_check<int>(model, other.statistic(), model.statistic());
    EXPECT_LE(r.residual, 1e-10);
    const auto mom = exact_T_moments(model);
    EXPECT_NEAR(mom.mean_T, mom.var_W, 1e-10);
  }
}

TEST(ExactTMoments, OccupancyMeanTEqualsClosedFormVariance) {
  const OccupancyModel occ(4, 1.0);
  const auto mom = exact_T_moments(occ.coordinate_model());
  EXPECT_NEAR(mom.var_W, occ_variance_exact(occ), 1e-12);
  EXPECT_NEAR(mom.mean_T, mom.var_W, 1e-12);
  EXPECT_LE(mom.var_cond_T_given_W, mom.var_cond_T_given_X + 1e-12);
  EXPECT_LE(mom.var_cond_T_given_X, mom.var_T + 1e-12);
}

TEST(MeanTEstimator, ZScoreSmallForQuadraticForm) {
  Stream s(6);
  const QuadraticFormModel qf(random_dense_matrix(12, s));
  const auto r = estimate_mean_T_and_sigma2(qf.coordinate_model(), 3000, 8, s, 2);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_NEAR(r.var_W, qf.sigma2_exact(), 0.1 * qf.sigma2_exact());
}

TEST(VarCondT, RademacherSumConditionalVarianceIsKnown) {
  // E(T | X) = sum_j (1 - x_j E x'_j) = n for a Rademacher sum, so Var(E(T|X)) = 0.
  Stream s(7);
  const auto v = estimate_var_cond_T_given_X(rademacher_sum_model(8), 300, 50, s);
  EXPECT_LE(v.mean, 4 * v.std_error + 1e-9);
}

TEST(Theorem22Bound, AssemblesTerms) {
  const auto b = theorem22_bound(4.0, 2.0, 3.0, VarianceLevel::given_X);
  EXPECT_DOUBLE_EQ(b.variance_term, 1.0);
  EXPECT_DOUBLE_EQ(b.third_moment_term, 3.0 / (2.0 * std::pow(2.0, 1.5)));
  EXPECT_DOUBLE_EQ(b.total, b.variance_term + b.third_moment_term);
  EXPECT_FALSE(b.modulo_constant);
  EXPECT_THROW(theorem22_bound(1.0, 0.0, 1.0, VarianceLevel::given_X), DegenerateStatisticError);
  EXPECT_THROW(theorem22_bound(-1.0, 1.0, 1.0, VarianceLevel::given_X), InvalidArgumentError);
}

TEST(VarianceLevel, ParsesKnownNames) {
  EXPECT_EQ(parse_variance_level("given_W"), VarianceLevel::given_W);
  EXPECT_EQ(parse_variance_level("given_X"), VarianceLevel::given_X);
  EXPECT_THROW(parse_variance_level("given_Y"), ConfigError);
}

TEST(EfronStein, HoldsExactly) {
  oracle::Gen g(8);
  const auto model = table_model(4, g);
  const auto r = efron_stein_check<int>(model, model.statistic());
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.variance, r.bound + 1e-12);
}

TEST(Lemma24, ExactGapWithinBound) {
  oracle::Gen g(9);
  const auto model = table_model(4, g);
  SmoothTestFunction phi{[](double w) { return std::sin(w); }, [](double w) { return std::cos(w); }, 1.0};
  const auto r = lemma24_check_exact(model, phi);
  EXPECT_TRUE(r.pass);
  Stream s(9);
  EXPECT_TRUE(lemma24_check(model, phi, 20000, s).pass);
}
