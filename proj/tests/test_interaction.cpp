#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stein/graph.hpp"
#include "stein/interaction.hpp"
#include "stein/zoo/occupancy.hpp"
#include "stein/zoo/quadratic_form.hpp"

using namespace stein;

TEST(IndexGraph, NormalizesEdgesAndCountsDegrees) {
  const IndexGraph g(5, {{3, 1}, {1, 3}, {0, 4}, {2, 1}});
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.has_edge(1, 3));
  EXPECT_TRUE(g.has_edge(3, 1));
  EXPECT_FALSE(g.has_edge(2, 2));
  EXPECT_EQ(g.degrees(), (std::vector<std::size_t>{1, 2, 1, 1, 1}));
  EXPECT_EQ(g.max_degree(), 2u);
  EXPECT_THROW(IndexGraph(3, {{1, 1}}), InvalidArgumentError);
  EXPECT_THROW(IndexGraph(3, {{0, 3}}), InvalidArgumentError);
}

TEST(IndexGraph, CliquesInducedAndSubgraph) {
  const auto g = IndexGraph::from_cliques(6, {{0, 1, 2}, {2, 5}});
  EXPECT_EQ(g.edge_count(), 4u);
  const std::vector<std::size_t> keep = {5, 2, 0};
  const auto h = g.induced(keep);
  EXPECT_TRUE(h.has_edge(0, 1));
  EXPECT_TRUE(h.has_edge(1, 2));
  EXPECT_FALSE(h.has_edge(0, 2));
  EXPECT_TRUE(g.subgraph_of(IndexGraph::complete(6)));
  EXPECT_FALSE(IndexGraph::complete(6).subgraph_of(g));
}

TEST(Permutation, ConventionAndRandomPermutationIsBijective) {
  const std::vector<int> x = {10, 20, 30};
  const std::vector<std::size_t> perm = {2, 0, 1};
  EXPECT_EQ(permute_coordinates<int>(x, perm), (std::vector<int>{20, 30, 10}));
  Stream s(1);
  for (int t = 0; t < 50; ++t) {
    auto p = random_permutation(17, s);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p[i], i);
  }
}

TEST(Noninteraction, MatchesMixedDifferenceByHand) {
  oracle::Gen g(2);
  auto f = [](std::span<const int> v) { return 2.0 * v[0] * v[1] + v[2]; };
  for (int t = 0; t < 50; ++t) {
    const auto x = g.signs(3), xp = g.signs(3);
    const double want = 2.0 * (x[0] - xp[0]) * (x[1] - xp[1]);
    EXPECT_DOUBLE_EQ((check_noninteraction<int>(f, x, xp, 0, 1)), want);
    EXPECT_DOUBLE_EQ((check_noninteraction<int>(f, x, xp, 0, 2)), 0.0);
  }
  EXPECT_THROW((check_noninteraction<int>(f, std::vector<int>{1, 1, 1}, std::vector<int>{1, 1, 1}, 1, 1)),
               InvalidArgumentError);
}

TEST(InteractionRule, CompleteRuleNeverTestsAndEdgelessRuleCatchesInteraction) {
  Stream s(3);
  const QuadraticFormModel qf(random_dense_matrix(6, s));
  const auto cm = qf.coordinate_model();
  const auto full = check_interaction_rule(cm, complete_rule<int>(), 500, s);
  EXPECT_EQ(full.tested, 0u);
  const auto none = check_interaction_rule(cm, edgeless_rule<int>(), 500, s);
  EXPECT_EQ(none.tested, 500u);
  EXPECT_GT(none.violations, 0u);
  ASSERT_TRUE(none.first_counterexample.has_value());
  const auto& c = *none.first_counterexample;
  EXPECT_GT(std::abs(check_noninteraction<int>(cm.statistic(), c.x, c.x_prime, c.i, c.j)), 1e-10);
}

TEST(InteractionRule, AdditiveStatisticIsFineWithNoEdges) {
  Stream s(4);
  const auto r = check_interaction_rule(rademacher_sum_model(8), edgeless_rule<int>(), 2000, s);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.tested, 2000u);
}

TEST(InteractionRule, DeterministicAcrossThreadCounts) {
  Stream a(5), b(5);
  const OccupancyModel occ(12, 1.0);
  const auto cm = occ.coordinate_model();
  const auto r1 = check_interaction_rule(cm, occ_rule(), 3000, a, 1e-10, 1);
  const auto r2 = check_interaction_rule(cm, occ_rule(), 3000, b, 1e-10, 4);
  EXPECT_EQ(r1.tested, r2.tested);
  EXPECT_EQ(r1.violations, r2.violations);
}

TEST(Symmetry, OccupancyRuleIsSymmetric) {
  Stream s(6);
  const OccupancyModel occ(15, 1.0);
  EXPECT_TRUE(check_symmetry(occ_rule(), occ.coordinate_model(), 500, s).pass());
}

TEST(Symmetry, DetectsIndexDependentRule) {
  GraphicalRule<int> first_two{"first_two", [](std::span<const int> x) {
                                 return IndexGraph(x.size(), {{0, 1}});
                               }, false, {}};
  Stream s(7);
  const auto r = check_symmetry(first_two, rademacher_sum_model(6), 200, s);
  EXPECT_FALSE(r.pass());
  EXPECT_TRUE(r.counterexample.has_value());
}

TEST(Extension, OccupancyRuleExtendsItselfExactly) {
  Stream s(8);
  const OccupancyModel occ(10, 1.0);
  const auto rule = occ_rule();
  const auto r = check_extension(rule, rule, occ.coordinate_model(), 14, ExtensionMode::exact, 300, s);
  EXPECT_TRUE(r.pass());
  EXPECT_THROW(check_extension(rule, rule, occ.coordinate_model(), 10, ExtensionMode::exact, 3, s), InvalidArgumentError);
}

TEST(FallingFactorial, SmallValues) {
  EXPECT_DOUBLE_EQ(falling_factorial(5, 0), 1.0);
  EXPECT_DOUBLE_EQ(falling_factorial(5, 3), 60.0);
  EXPECT_DOUBLE_EQ(falling_factorial(2, 3), 0.0);
}

TEST(EdgeProbabilityIdentity, CompleteRuleIsExact) {
  Stream s(9);
  const auto cm = rademacher_sum_model(7);
  auto complete = complete_rule<int>();
  const std::vector<std::size_t> others = {1, 4};
  const auto r = lemma46_check(complete, cm, 0, others, 200, s);
  EXPECT_DOUBLE_EQ(r.lhs, 1.0);
  EXPECT_DOUBLE_EQ(r.rhs, 1.0);
}

TEST(EdgeProbabilityIdentity, OccupancyRuleAgreesInDistribution) {
  Stream s(10);
  const OccupancyModel occ(9, 1.0);
  const std::vector<std::size_t> others = {2, 5};
  const auto r = lemma46_check(occ_rule(), occ.coordinate_model(), 3, others, 40000, s, 2);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_THROW(lemma46_check(occ_rule(), occ.coordinate_model(), 3, std::vector<std::size_t>{3}, 10, s),
               InvalidArgumentError);
}

TEST(Theorem25Bound, IsFlaggedAndScalesWithC) {
  const auto a = theorem25_bound(4.0, 16.0, 81.0, 2.0, 25, 1.0);
  const auto b = theorem25_bound(4.0, 16.0, 81.0, 2.0, 25, 3.0);
  EXPECT_TRUE(a.modulo_constant);
  EXPECT_NEAR(a.variance_term, std::sqrt(25.0) * 2.0 * 3.0 / 4.0, 1e-12);
  EXPECT_NEAR(b.variance_term, 3 * a.variance_term, 1e-12);
  EXPECT_NEAR(a.third_moment_term, 2.0 / (2.0 * 8.0), 1e-12);
}
