#include <gtest/gtest.h>

#include <limits>

#include "oracles.hpp"
#include "stein/interaction.hpp"
#include "stein/stein_t.hpp"
#include "stein/zoo/coverage.hpp"
#include "stein/zoo/kdtree.hpp"
#include "stein/zoo/nearest_neighbor.hpp"
#include "stein/zoo/occupancy.hpp"
#include "stein/zoo/quadratic_form.hpp"

using namespace stein;

// --- quadratic form ----------------------------------------------------------

TEST(QuadraticForm, StatisticMatchesDoubleLoop) {
  Stream s(1);
  oracle::Gen g(1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + g.below(12);
    const QuadraticFormModel qf(random_dense_matrix(n, s));
    const auto x = g.signs(n);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) want += qf.matrix()(i, j) * x[i] * x[j];
    EXPECT_NEAR(qf_statistic(qf, x), want, 1e-12);
  }
}

TEST(QuadraticForm, ExactVarianceMatchesEnumeration) {
  Stream s(2);
  const QuadraticFormModel qf(random_goe_matrix(6, s));
  const auto mom = exact_T_moments(qf.coordinate_model());
  EXPECT_NEAR(mom.var_W, qf.sigma2_exact(), 1e-12);
  EXPECT_NEAR(mom.var_cond_T_given_X, qf_cond_T_variance(qf), 1e-10);
}

TEST(QuadraticForm, ValidatesInput) {
  SymmetricMatrix m(2);
  m.a = {0, 1, 2, 0};
  EXPECT_THROW(QuadraticFormModel{m}, InvalidArgumentError);
  SymmetricMatrix ok(2);
  ok.a = {5, 1, 1, 5};
  const QuadraticFormModel qf(ok);
  EXPECT_EQ(qf.matrix()(0, 0), 0.0);
  EXPECT_THROW(qf_statistic(qf, std::vector<int>{1, 0}), InvalidCoordinateError);
}

TEST(QuadraticForm, ConstantExplicitBoundOrdering) {
  Stream s(3);
  const QuadraticFormModel qf(random_block_matrix(64, s));
  const auto b = prop31_bound(qf);
  EXPECT_FALSE(b.modulo_constant);
  EXPECT_NEAR(b.total, b.variance_term + b.third_moment_term, 1e-15);
  // The conditional-variance term it replaces is never larger.
  EXPECT_LE(std::sqrt(qf_cond_T_variance(qf)) / qf.sigma2_exact(), b.variance_term + 1e-15);
}

// --- occupancy ---------------------------------------------------------------

TEST(Occupancy, StatisticCountsEmptyBoxes) {
  oracle::Gen g(4);
  const OccupancyModel occ(20, 1.5);
  EXPECT_EQ(occ.m_boxes(), 30u);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> x(20);
    for (auto& v : x) v = static_cast<int>(g.below(30));
    EXPECT_EQ(occ_statistic(occ, x), oracle::empty_boxes(x, 30));
  }
  EXPECT_THROW(occ_statistic(occ, std::vector<int>(20, 30)), InvalidCoordinateError);
  EXPECT_THROW(OccupancyModel(3, 0.5), InvalidArgumentError);
}

TEST(Occupancy, ClosedFormMomentsMatchEnumeration) {
  for (auto [n, alpha] : {std::pair<std::size_t, double>{3, 1.0}, {4, 1.0}, {4, 0.5}, {2, 2.0}}) {
    const OccupancyModel occ(n, alpha);
    const auto e = occ_moments_enumerated(occ);
    EXPECT_NEAR(occ_mean_exact(occ), e.mean, 1e-12);
    EXPECT_NEAR(occ_variance_exact(occ), e.variance, 1e-12);
  }
}

TEST(Occupancy, VarianceRateAndConstant) {
  EXPECT_NEAR(occ_variance_rate(1.0), std::exp(-1.0) - 2 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(occ_f_alpha(2.0), std::pow(2 * std::exp(-0.5) - 3 * std::exp(-1.0), -1.5), 1e-12);
  EXPECT_THROW(occ_variance_rate(0.0), DomainError);
  const OccupancyModel big(4000, 1.0);
  EXPECT_NEAR(occ_variance_exact(big) / occ_sigma2_asymptotic(big), 1.0, 2e-3);
}

TEST(Occupancy, EmpiricalVarianceAgreesWithClosedForm) {
  Stream s(5);
  const OccupancyModel occ(50, 1.0);
  const auto e = occ_sigma2_empirical(occ, 20000, s);
  EXPECT_NEAR(e.mean, occ_variance_exact(occ), 4 * e.std_error);
}

TEST(Occupancy, RuleGroupsSameBox) {
  const auto g = occ_rule()(std::vector<int>{3, 1, 3, 0, 1, 3});
  EXPECT_EQ(g, IndexGraph::from_cliques(6, {{0, 2, 5}, {1, 4}}));
}

TEST(Occupancy, BoundIsFlaggedRate) {
  const OccupancyModel occ(400, 1.0);
  const auto b = prop32_bound(occ, 2.0);
  EXPECT_TRUE(b.modulo_constant);
  EXPECT_NEAR(b.total, 2.0 * occ_f_alpha(1.0) / 20.0, 1e-12);
}

// --- coverage ----------------------------------------------------------------

TEST(Coverage, GridAreaCountsCoveredCellCenters) {
  oracle::Gen g(6);
  const std::size_t res = 4096;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + g.below(30);
    const double eps = g.uniform(0.005, 0.1);
    const CoverageModel<1> model(n, eps, GridArea{res});
    std::vector<Point<1>> x(n);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) x[i][0] = c[i] = g.uniform();
    std::size_t covered = 0;
    for (std::size_t cell = 0; cell < res; ++cell) {
      const double mid = (static_cast<double>(cell) + 0.5) / res;
      bool hit = false;
      for (double p : c) hit = hit || (mid - p) * (mid - p) <= eps * eps;
      covered += hit;
    }
    const double a = model.area(x);
    EXPECT_DOUBLE_EQ(a, static_cast<double>(covered) / res);
    // Each interval endpoint is off by at most one cell.
    EXPECT_LE(std::abs(a - oracle::union_length(c, eps)), 2.0 * n / res);
  }
}

TEST(Coverage, TwoDimensionalGridCountsCoveredCellCenters) {
  oracle::Gen g(16);
  const std::size_t res = 128;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + g.below(12);
    const double eps = g.uniform(0.02, 0.2);
    const CoverageModel<2> model(n, eps, GridArea{res});
    std::vector<Point<2>> x(n);
    for (auto& p : x) p = {g.uniform(), g.uniform()};
    std::size_t covered = 0;
    for (std::size_t i = 0; i < res; ++i)
      for (std::size_t j = 0; j < res; ++j) {
        const Point<2> mid = {(i + 0.5) / res, (j + 0.5) / res};
        bool hit = false;
        for (const auto& p : x) hit = hit || squared_distance(mid, p) <= eps * eps;
        covered += hit;
      }
    EXPECT_DOUBLE_EQ(model.area(x), static_cast<double>(covered) / (res * res));
  }
}

TEST(Coverage, SingleInteriorDiscAndEstimatorAgreement) {
  const double eps = 0.1;
  const std::vector<Point<2>> one = {{0.5, 0.5}};
  const CoverageModel<2> grid(1, eps, GridArea{2048});
  const CoverageModel<2> mc(1, eps, MonteCarloArea{400000, 3});
  EXPECT_NEAR(grid.area(one), M_PI * eps * eps, 1e-5);
  EXPECT_NEAR(mc.area(one), M_PI * eps * eps, 4 * std::sqrt(M_PI * eps * eps / 400000));
  const std::vector<Point<2>> corner = {{0.0, 0.0}};
  EXPECT_NEAR(grid.area(corner), M_PI * eps * eps / 4, 1e-5);
}

TEST(Coverage, ThreeDimensionalBallVolume) {
  const CoverageModel<3> model(1, 0.2, GridArea{256});
  const std::vector<Point<3>> one = {{0.5, 0.5, 0.5}};
  EXPECT_NEAR(model.area(one), 4.0 / 3.0 * M_PI * 0.008, 5e-4);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 / 3.0 * M_PI, 1e-12);
}

TEST(Coverage, PropertyAreaMonotoneAndMoveBounded) {
  Stream s(7);
  const std::size_t n = 40;
  const double eps = 0.08;
  const CoverageModel<2> model(n, eps, GridArea{1024});
  const auto cm = model.coordinate_model();
  const double cap = coverage_M_eps(2, eps) + model.move_tolerance();
  for (int t = 0; t < 100; ++t) {
    auto x = cm.draw(s);
    const double a = model.area(x);
    auto fewer = x;
    fewer.pop_back();
    const CoverageModel<2> smaller(n - 1, eps, GridArea{1024});
    EXPECT_LE(smaller.area(fewer), a + 1e-12);
    x[s.below(n)] = cm.draw_coordinate(s);
    EXPECT_LE(std::abs(model.area(x) - a), cap);
  }
}

TEST(Coverage, RejectsPointsOutsideCube) {
  const CoverageModel<2> model(1, 0.1);
  EXPECT_THROW(model.area(std::vector<Point<2>>{{1.5, 0.5}}), InvalidCoordinateError);
}

TEST(Coverage, RuleMatchesPairwiseDistances) {
  oracle::Gen g(8);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + g.below(60);
    const double eps = g.uniform(0.01, 0.2);
    std::vector<Point<2>> x(n);
    for (auto& p : x) p = {g.uniform(), g.uniform()};
    const auto graph = cov_rule<2>(eps)(x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        ASSERT_EQ(graph.has_edge(i, j), squared_distance(x[i], x[j]) <= 4 * eps * eps);
  }
}

TEST(Coverage, PairProbabilityForSmallRadius) {
  Stream s(9);
  const double eps = 0.05;
  const auto p = coverage_p_eps<2>(eps, 200000, s);
  // Away from the boundary the disc of radius 2 eps has area 4 pi eps^2; edges shave a little.
  EXPECT_LT(p.mean, 4 * M_PI * eps * eps);
  EXPECT_GT(p.mean, 0.85 * 4 * M_PI * eps * eps);
}

// --- nearest neighbors --------------------------------------------------------

TEST(KdTree, PropertyMatchesSortOracle) {
  oracle::Gen g(10);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + g.below(600);
    std::vector<Point<2>> x(n);
    for (auto& p : x) p = {g.uniform(), g.uniform()};
    const KdTree<2> tree(x, true);
    for (int q = 0; q < 10; ++q) {
      const Point<2> query = {g.uniform(-0.2, 1.2), g.uniform(-0.2, 1.2)};
      const std::size_t count = 1 + g.below(20);
      const auto got = tree.nearest(query, count);
      const auto want = oracle::nearest_by_sort<2>(x, query, count);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) ASSERT_EQ(got[i].second, want[i]);
    }
  }
}

TEST(NearestNeighbor, RankMatchesCountingOracleAndRejectsTies) {
  oracle::Gen g(11);
  for (int t = 0; t < 40; ++t) {
    std::vector<Point<2>> x(25);
    for (auto& p : x) p = {g.uniform(), g.uniform()};
    const std::size_t i = g.below(25), j = (i + 1 + g.below(24)) % 25;
    EXPECT_EQ(nn_rank<2>(x, i, j), oracle::rank_by_count<2>(x, i, j));
  }
  for (int t = 0; t < 20; ++t) {
    std::vector<Point<2>> x(15);
    for (auto& p : x) p = {g.uniform(), g.uniform()};
    const std::size_t i = g.below(15);
    std::vector<std::size_t> ranks;
    for (std::size_t j = 0; j < 15; ++j)
      if (j != i) ranks.push_back(nn_rank<2>(x, i, j));
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t r = 0; r < ranks.size(); ++r) ASSERT_EQ(ranks[r], r + 1);
  }
  const std::vector<Point<1>> tied = {{0.0}, {1.0}, {-1.0}};
  EXPECT_TRUE(has_distance_ties<1>(tied));
  EXPECT_THROW(nn_rank<1>(tied, 0, 1), TieError);
  EXPECT_EQ(nn_rank<1>(std::vector<Point<1>>{{0.0}, {1.0}, {3.0}}, 2, 0), 2u);
}

TEST(NearestNeighbor, NeighborhoodContainsSelfAndRanks) {
  const std::vector<Point<1>> x = {{0.0}, {1.0}, {3.0}, {3.5}, {10.0}};
  const auto nb = nn_neighborhood<1>(x, 2, 1);
  // 2 itself and 3, whose nearest neighbor is 2.
  EXPECT_EQ(nb, (std::vector<std::size_t>{2, 3}));
}

TEST(NearestNeighbor, NeighborhoodUnionCanExceedTwiceAlphaK) {
  // Five points on a line: index 1 moves from beside 0 to beside 3.
  const std::vector<Point<1>> x = {{0.0}, {1.0}, {2.1}, {10.0}, {12.1}};
  auto xp = x;
  xp[1] = {11.0};
  EXPECT_EQ((nn_neighborhood_change_bound<1>(x, xp, 1, 1)), 5u);
  EXPECT_GT(5u, 2 * alpha_cones(1) * 1);
}

TEST(NearestNeighbor, RulesAreSymmetricAndExtensionContainsBase) {
  Stream s(12);
  const NnModel<2> model(30, 2, NnFunctional::scaled_kth_distance);
  const auto cm = model.coordinate_model();
  EXPECT_TRUE(check_symmetry(nn_rule<2>(2), cm, 200, s).pass());
  const auto r = check_extension(nn_rule<2>(2), nn_rule_ext<2>(2), cm, 34, ExtensionMode::containment, 300, s);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(nn_rule_ext<2>(2).extension_of, nn_rule<2>(2).name);
}

TEST(NearestNeighbor, InteractionRuleHoldsForAllFunctionals) {
  Stream s(13);
  for (auto f : {NnFunctional::kth_within_radius, NnFunctional::scaled_kth_distance, NnFunctional::levina_bickel_term}) {
    const NnModel<2> model(14, 2, f, 0.3);
    const auto r = check_interaction_rule(model.coordinate_model(), nn_rule<2>(2), 3000, s);
    EXPECT_EQ(r.violations, 0u) << to_string(f);
    EXPECT_GT(r.tested, 0u);
  }
}

TEST(NearestNeighbor, LocalTermsByBruteForce) {
  oracle::Gen g(14);
  std::vector<Point<2>> x(20);
  for (auto& p : x) p = {g.uniform(), g.uniform()};
  const NnModel<2> model(20, 3, NnFunctional::scaled_kth_distance);
  const auto terms = model.local_terms(x);
  for (std::size_t l = 0; l < x.size(); ++l) {
    const auto idx = oracle::nearest_by_sort<2>(x, x[l], 4);
    EXPECT_NEAR(terms[l], std::sqrt(20.0) * std::sqrt(squared_distance(x[l], x[idx[3]])), 1e-12);
  }
}

TEST(NearestNeighbor, LevinaBickelExamples) {
  EXPECT_NEAR(levina_bickel<1>(std::vector<Point<1>>{{0.0}, {1.0}, {3.0}}, 2), 1.6064, 1e-3);
  EXPECT_THROW(levina_bickel<1>(std::vector<Point<1>>{{0.0}, {1.0}}, 2), InvalidArgumentError);
  // Evenly spread points on a line look one-dimensional.
  Stream s(15);
  std::vector<Point<1>> line(3000);
  for (auto& p : line) p = {s.uniform()};
  EXPECT_NEAR(levina_bickel<1>(line, 10), 1.0, 0.15);
}

TEST(NearestNeighbor, Theorem34BoundShape) {
  EXPECT_THROW(theorem34_bound(2, 1, 1, 6, 1, 10), MomentOrderError);
  const auto inf = theorem34_bound(2, 1, 1.0, std::numeric_limits<double>::infinity(), 1.0, 100);
  EXPECT_NEAR(inf.variance_term, 8.0 / 10.0, 1e-12);
  EXPECT_NEAR(inf.third_moment_term, 8.0 / 10.0, 1e-12);
  EXPECT_TRUE(inf.modulo_constant);
  const auto p8 = theorem34_bound(2, 1, 1.0, 8, 1.0, 100);
  EXPECT_NEAR(p8.variance_term, 8.0, 1e-12);
  EXPECT_THROW(alpha_cones(3), DomainError);
  EXPECT_EQ(parse_nn_functional("levina_bickel_term"), NnFunctional::levina_bickel_term);
  EXPECT_THROW(parse_nn_functional("median"), ConfigError);
}
