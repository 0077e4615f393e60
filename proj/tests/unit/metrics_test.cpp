#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "imp/error.h"
#include "imp/metrics.h"
#include "metric_oracle.h"

namespace imp {
namespace {

ImportanceMap random_map(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(w * h);
  for (auto& x : v) x = u(rng);
  return ImportanceMap(w, h, v);
}

TEST(Evaluate, IdentityIsPerfect) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const ImportanceMap m = random_map(rng, 8, 8);
    const MetricReport r = evaluate(m, m);
    EXPECT_NEAR(r.cc, 1.0, 1e-9);
    EXPECT_NEAR(r.rmse, 0.0, 1e-9);
    EXPECT_NEAR(r.r2, 1.0, 1e-9);
    EXPECT_NEAR(r.kl, 0.0, 1e-9);
  }
}

TEST(Evaluate, AntiCorrelated) {
  const MetricReport r = evaluate(ImportanceMap(2, 2, {1, 1, 0, 0}), ImportanceMap(2, 2, {0, 0, 1, 1}));
  EXPECT_NEAR(r.cc, -1.0, 1e-12);
}

TEST(Evaluate, FrozenHighPrecisionCase) {
  // Reference digits from a 50-digit evaluation of the same formulas.
  const ImportanceMap truth(2, 2, {0.1, 0.2, 0.3, 0.4});
  const ImportanceMap pred(2, 2, {0.4, 0.3, 0.2, 0.1});
  const MetricReport r = evaluate(pred, truth);
  EXPECT_NEAR(r.rmse, 0.2236067977499789758472527, 1e-9);
  EXPECT_NEAR(r.kl, 0.4564343949065065560848002, 1e-9);
  EXPECT_NEAR(r.r2, -3.0, 1e-9);
  EXPECT_NEAR(r.cc, -1.0, 1e-9);
  const auto o = testing::oracle_evaluate(pred.values(), truth.values());
  EXPECT_LT(testing::max_abs_diff(r, o), 1e-12);
}

TEST(Evaluate, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const ImportanceMap p = random_map(rng, 8, 8), g = random_map(rng, 8, 8);
    EXPECT_LT(testing::max_abs_diff(evaluate(p, g), testing::oracle_evaluate(p.values(), g.values())), 1e-9);
  }
}

TEST(Evaluate, ConstantTruthAndShapes) {
  try {
    evaluate(ImportanceMap(2, 2, {0, 1, 0, 1}), ImportanceMap(2, 2, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstantTruth);
  }
  try {
    evaluate(ImportanceMap(3, 2, 0.5), ImportanceMap(2, 2, {0, 1, 0, 1}), {.strict = true});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Evaluate, ResamplesWhenNotStrict) {
  std::mt19937_64 rng(3);
  const ImportanceMap g = random_map(rng, 8, 8);
  const ImportanceMap p = resample_bilinear(g, 16, 16);
  const MetricReport r = evaluate(p, g);
  EXPECT_TRUE(std::isfinite(r.cc));
  EXPECT_GT(r.cc, 0.5);
}

TEST(Evaluate, ConstantPredictionHasZeroCorrelation) {
  const MetricReport r = evaluate(ImportanceMap(2, 2, 0.5), ImportanceMap(2, 2, {0, 1, 0, 1}));
  EXPECT_EQ(r.cc, 0.0);
  EXPECT_NEAR(r.rmse, 0.5, 1e-15);
}

TEST(Evaluate, CcInvariantUnderPositiveAffineMaps) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> alpha(0.05, 0.5), beta(0, 0.4);
  for (int t = 0; t < 100; ++t) {
    const ImportanceMap p = random_map(rng, 8, 8), g = random_map(rng, 8, 8);
    const double a = alpha(rng), b = beta(rng);
    std::vector<double> v(p.values().begin(), p.values().end());
    for (auto& x : v) x = a * x + b;
    EXPECT_NEAR(evaluate(ImportanceMap(8, 8, v), g).cc, evaluate(p, g).cc, 1e-9);
  }
}

TEST(Evaluate, InvariantRanges) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const MetricReport r = evaluate(random_map(rng, 6, 5), random_map(rng, 6, 5));
    EXPECT_GE(r.rmse, 0.0);
    EXPECT_GE(r.cc, -1.0);
    EXPECT_LE(r.cc, 1.0);
    EXPECT_GT(r.kl, 0.0);
  }
}

TEST(EvaluateMean, AveragesPerImage) {
  std::mt19937_64 rng(6);
  std::vector<std::pair<ImportanceMap, ImportanceMap>> pairs;
  for (int i = 0; i < 4; ++i) pairs.emplace_back(random_map(rng, 4, 4), random_map(rng, 4, 4));
  const MetricReport mean = evaluate_mean(pairs);
  double cc = 0, kl = 0;
  for (const auto& [p, g] : pairs) {
    cc += evaluate(p, g).cc;
    kl += evaluate(p, g).kl;
  }
  EXPECT_NEAR(mean.cc, cc / 4, 1e-15);
  EXPECT_NEAR(mean.kl, kl / 4, 1e-15);
  EXPECT_THROW(evaluate_mean({}), Error);
}

}  // namespace
}  // namespace imp
