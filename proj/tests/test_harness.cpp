#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stein/harness/config.hpp"
#include "stein/harness/emit.hpp"
#include "stein/harness/experiment.hpp"
#include "stein/harness/rate.hpp"

using namespace stein;
using namespace stein::harness;

namespace {

const char* kOccupancy = R"(
seed = 17
replications = 400
n_grid = 16, 32, 64
bootstrap_resamples = 20

[model]
kind = occupancy
alpha = 1

[output]
timing = false
)";

}  // namespace

TEST(Config, ParsesTopLevelAndBlocks) {
  const auto c = parse_config_text(kOccupancy);
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.replications, 400u);
  EXPECT_EQ(c.n_grid, (std::vector<std::size_t>{16, 32, 64}));
  EXPECT_EQ(c.model.kind, ModelKind::occupancy);
  EXPECT_DOUBLE_EQ(c.model.alpha, 1.0);
  EXPECT_FALSE(c.output.timing);
  EXPECT_EQ(c.output.format, "csv");
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config_text("n_grid = 8\nbogus = 1\n[model]\nkind = occupancy\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\n[model]\nkind = occupancy\nshape = round\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\n[model]\nkind = lattice\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8, 4\n[model]\nkind = occupancy\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\nreplications = many\n[model]\nkind = occupancy\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\n[model]\nkind = occupancy\n[bound]\nvariance_level = given_W\n"),
               ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\n[model]\nkind = nearest_neighbor\ndimension = 3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\n[model]\nkind = nearest_neighbor\np_moment = 4\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_grid = 8\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/file.cfg"), IoError);
}

TEST(Config, FingerprintTracksModelBlockOnly) {
  auto a = parse_config_text(kOccupancy);
  auto b = parse_config_text(std::string(kOccupancy) + "\n");
  EXPECT_EQ(model_fingerprint(a.model), model_fingerprint(b.model));
  auto c = parse_config_text("n_grid = 8\n[model]\nkind = occupancy\nalpha = 2\n");
  EXPECT_NE(model_fingerprint(a.model), model_fingerprint(c.model));
}

TEST(Rate, RecoversExactPowerLaw) {
  const std::vector<double> n = {10, 40, 160, 640};
  std::vector<double> d;
  for (double v : n) d.push_back(3.0 * std::pow(v, -0.5));
  const auto f = fit_power_law(n, d);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Rate, PropertyMatchesOlsOracle) {
  oracle::Gen g(1);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 3 + g.below(6);
    std::vector<double> n(k), d(k), lx(k), ly(k);
    for (std::size_t i = 0; i < k; ++i) {
      n[i] = std::pow(2.0, 3 + static_cast<double>(i));
      d[i] = g.uniform(0.01, 1.0);
      lx[i] = std::log(n[i]);
      ly[i] = std::log(d[i]);
    }
    const auto [slope, intercept] = oracle::ols(lx, ly);
    const auto f = fit_power_law(n, d);
    EXPECT_NEAR(f.slope, slope, 1e-10);
    EXPECT_NEAR(f.intercept, intercept, 1e-10);
    EXPECT_GE(f.r2, 0.0);
    EXPECT_LE(f.r2, 1.0);
  }
}

TEST(Rate, InsufficientData) {
  EXPECT_THROW(fit_power_law(std::vector<double>{1, 2}, std::vector<double>{1, 1}), InsufficientDataError);
  EXPECT_THROW(fit_power_law(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 1}), InsufficientDataError);
  EXPECT_THROW(fit_power_law(std::vector<double>{4, 4, 4}, std::vector<double>{1, 2, 1}), InsufficientDataError);
  EXPECT_DOUBLE_EQ(fit_power_law(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 2}).r2, 1.0);
}

TEST(Experiment, OccupancyRecordsAreDeterministicAcrossThreads) {
  auto c = parse_config_text(kOccupancy);
  c.threads = 1;
  const auto a = run_experiment(c);
  c.threads = 4;
  const auto b = run_experiment(c);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(to_csv(a), to_csv(b));
  for (const auto& r : a) {
    EXPECT_EQ(r.sigma2_provenance, Sigma2Provenance::exact);
    EXPECT_EQ(r.delta.standardization, StandardizationMode::known_moments);
    EXPECT_TRUE(r.bound.modulo_constant);
    EXPECT_GT(r.delta.w1, 0.0);
    EXPECT_EQ(r.wall_ms, 0.0);
  }
}

TEST(Experiment, SeedChangesDraws) {
  auto c = parse_config_text(kOccupancy);
  const auto a = run_experiment(c);
  c.seed = 18;
  const auto b = run_experiment(c);
  EXPECT_NE(a[0].delta.w1, b[0].delta.w1);
}

TEST(Experiment, EveryModelKindRuns) {
  const char* blocks[] = {
      "[model]\nkind = rademacher_sum\n[bound]\nouter_reps = 20\ninner_reps = 10\nthird_moment_reps = 50\n",
      "[model]\nkind = quadratic_form\nmatrix = goe\n",
      "[model]\nkind = coverage\ndimension = 1\n",
      "[model]\nkind = coverage\ndimension = 2\nestimator = monte_carlo\nprobes = 2000\nepsilon_scale = 0.7\n"
      "[bound]\nouter_reps = 10\ninner_reps = 10\n",
      "[model]\nkind = nearest_neighbor\ndimension = 2\nk = 2\nfunctional = scaled_kth_distance\n"
      "[bound]\nthird_moment_reps = 100\n",
      "[model]\nkind = nearest_neighbor\ndimension = 1\nk = 2\np_moment = 8\nfunctional = levina_bickel_term\n"
      "[bound]\nthird_moment_reps = 100\n",
  };
  for (const char* b : blocks) {
    const auto c = parse_config_text(std::string("replications = 200\nn_grid = 16, 32\nbootstrap_resamples = 5\n") + b);
    const auto r = run_experiment(c);
    ASSERT_EQ(r.size(), 2u) << b;
    for (const auto& rec : r) {
      EXPECT_TRUE(std::isfinite(rec.delta.w1)) << b;
      EXPECT_TRUE(std::isfinite(rec.bound.total)) << b;
      EXPECT_GT(rec.sigma2, 0.0) << b;
    }
  }
}

TEST(Experiment, RademacherSumBoundIsCertified) {
  const auto c = parse_config_text(
      "replications = 2000\nn_grid = 64\nbootstrap_resamples = 10\n[model]\nkind = rademacher_sum\n");
  const auto r = run_experiment(c).front();
  EXPECT_FALSE(r.bound.modulo_constant);
  EXPECT_EQ(r.sigma2, 64.0);
  // Var(E(T|X)) = 0 and E|Delta_j f|^3 = 4, so only n * 4 / (2 n^{3/2}) remains.
  EXPECT_NEAR(r.bound.third_moment_term, 0.5 * 64 * 4 / std::pow(64.0, 1.5), 0.05);
  EXPECT_GE(r.bound.total, r.delta.w1);
}

TEST(Emit, CsvAndJsonRoundTrip) {
  auto c = parse_config_text(kOccupancy);
  const auto recs = run_experiment(c);
  const auto json_back = parse_records(to_json(recs));
  ASSERT_EQ(json_back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_TRUE(json_back[i] == recs[i]);
  const auto csv = to_csv(recs);
  EXPECT_EQ(to_csv(parse_records(csv)), csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,n,replications,seed,delta_hat,delta_se_proxy,bound_total,bound_variance_term,"
            "bound_third_moment_term,sigma2,sigma2_provenance,variance_level,modulo_C,wall_ms");
}

TEST(Emit, RejectsMalformedRecords) {
  EXPECT_THROW(parse_records(""), IoError);
  EXPECT_THROW(parse_records("a,b\n1,2\n"), IoError);
  EXPECT_THROW(parse_records("{\"schema_version\": 9, \"records\": []}"), IoError);
  EXPECT_THROW(parse_records("{not json"), IoError);
  EXPECT_THROW(emit({}, "xml"), ConfigError);
}
