#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "faultsev/error.hpp"
#include "faultsev/random.hpp"
#include "faultsev/severity.hpp"

namespace faultsev {
namespace {

TEST(SeverityTest, WorkedExample) {
  SeverityState s(1.0, 2.0);
  SeverityPoint p;
  for (double x : {0.5, 1.5, 2.5}) p = s.update(x);
  EXPECT_EQ(s.count(), 2u);
  EXPECT_NEAR(p.mu, 1.0, 1e-12);
  EXPECT_NEAR(p.sigma * p.sigma, 0.25, 1e-12);
  EXPECT_NEAR(p.sigma, 0.5, 1e-12);
  EXPECT_NEAR(p.index, 2.0, 1e-12);
  EXPECT_TRUE(p.fault);
}

TEST(SeverityTest, NoFaultsMeansZero) {
  const std::vector<double> scores{0.1, 0.9, 1.0, 0.0};
  const SeveritySeries s = streaming_severity(scores, 1.0, 2.0);
  for (std::size_t t = 0; t < scores.size(); ++t) {
    EXPECT_EQ(s.mu[t], 0.0);
    EXPECT_EQ(s.sigma[t], 0.0);
    EXPECT_EQ(s.index[t], 0.0);
  }
  EXPECT_EQ(streaming_severity(std::vector<double>{}, 1.0, 2.0).size(), 0u);
}

TEST(SeverityTest, SingleExceedance) {
  SeverityState s(1.0);
  const SeverityPoint p = s.update(1.75);
  EXPECT_EQ(p.sigma, 0.0);
  EXPECT_EQ(p.mu, 0.75);
  EXPECT_EQ(p.index, 0.75);
}

TEST(SeverityTest, WeightZeroGivesMean) {
  const std::vector<double> scores{0.5, 1.5, 2.5, 4.0};
  const SeveritySeries s = streaming_severity(scores, 1.0, 0.0);
  for (std::size_t t = 0; t < scores.size(); ++t) EXPECT_EQ(s.index[t], s.mu[t]);
}

TEST(SeverityTest, SetWeightRescalesWithoutReplay) {
  SeverityState s(1.0, 2.0);
  for (double x : {0.5, 1.5, 2.5}) s.update(x);
  s.set_weight(4.0);
  EXPECT_NEAR(s.current().index, 1.0 + 4.0 * 0.5, 1e-12);
  EXPECT_THROW(s.set_weight(-1.0), ContractError);
  s.reset();
  EXPECT_EQ(s.count(), 0u);
  EXPECT_EQ(s.current().index, 0.0);
  EXPECT_EQ(s.threshold(), 1.0);
}

TEST(SeverityTest, InvalidInputs) {
  SeverityState s(1.0);
  EXPECT_THROW(s.update(-0.1), ContractError);
  EXPECT_THROW(SeverityState(1.0, -2.0), ContractError);
}

TEST(SeverityTest, StreamingMatchesBatch) {
  Rng rng(123);
  std::vector<double> scores(10000);
  for (double& x : scores) x = std::abs(rng.normal()) * 1.5;
  const SeveritySeries a = streaming_severity(scores, 1.0, 2.0);
  const SeveritySeries b = batch_severity(scores, 1.0, 2.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    worst = std::max({worst, std::abs(a.mu[t] - b.mu[t]), std::abs(a.sigma[t] - b.sigma[t]),
                      std::abs(a.index[t] - b.index[t])});
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(SeverityTest, IndexDominatesMeanAndIsNonNegative) {
  Rng rng(5);
  SeverityState s(0.7, 2.0);
  for (int i = 0; i < 5000; ++i) {
    const SeverityPoint p = s.update(rng.uniform(0.0, 3.0));
    ASSERT_GE(p.mu, 0.0);
    ASSERT_GE(p.sigma, 0.0);
    ASSERT_GE(p.index, p.mu);
  }
}

TEST(SeverityTest, ShiftingScoresAndThresholdTogetherKeepsIndex) {
  Rng rng(6);
  std::vector<double> scores(500), shifted(500);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform(0.0, 2.0);
    shifted[i] = scores[i] + 3.0;
  }
  const SeveritySeries a = streaming_severity(scores, 1.0, 2.0);
  const SeveritySeries b = streaming_severity(shifted, 4.0, 2.0);
  for (std::size_t t = 0; t < scores.size(); ++t) EXPECT_NEAR(a.index[t], b.index[t], 1e-9);
}

TEST(SeverityTest, CumulativeIndexVariesLessThanExceedance) {
  Rng rng(8);
  std::vector<double> scores(2000);
  for (double& x : scores) x = 1.0 + std::abs(rng.normal());
  const SeveritySeries sev = streaming_severity(scores, 1.0, 2.0);
  const SmoothingComparison c = compare_smoothing(scores, 1.0, sev, 0, false);
  EXPECT_EQ(c.steps, scores.size() - 1);
  EXPECT_LT(c.index_variation, 0.1 * c.exceedance_variation);
}

TEST(SeverityTest, CsvLayout) {
  AnomalySeries s;
  s.scores = Matrix{{0.5, 1.5}};
  s.time_index = {3, 4};
  s.threshold = {1.0};
  const std::string csv = severity_csv(s, severity_for(s, 2.0));
  EXPECT_EQ(csv, "t,node,score,threshold,flag,mu,sigma,index\n3,0,0.5,1,0,0,0,0\n4,0,1.5,1,1,0.5,0,0.5\n");
}

}  // namespace
}  // namespace faultsev
