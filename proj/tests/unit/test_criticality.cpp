#include <gtest/gtest.h>

#include "adlab/criticality.hpp"
#include "support/oracles.hpp"

using namespace adlab;

namespace {

const ADProfile kStd = ADProfile::constant_rate(2.0, 4.0, 15.0);
const StaticPart kIY = StaticPart::make(ScenarioType::IntersectionYield);

TestCase at(double x_a, double x_f, double x_e = 20.0, double v_e = 5.0) {
  TestCase tc;
  tc.static_part = kIY;
  tc.x_e = x_e;
  tc.v_e = v_e;
  tc.x_a = x_a;
  tc.x_f = x_f;
  return tc;
}

}  // namespace

TEST(Criticality, MostCriticalAgainstIntegration) {
  CriticalBoundary b = most_critical(20.0, 5.0, kStd, kIY);
  auto o = oracle::boundary(20.0, 5.0, 10.0, {2.0, 4.0, 15.0});
  EXPECT_TRUE(oracle::rel_close(b.x_hat_a, o.x_hat_a)) << b.x_hat_a << " vs " << o.x_hat_a;
  EXPECT_TRUE(oracle::rel_close(b.x_hat_f, o.x_hat_f)) << b.x_hat_f << " vs " << o.x_hat_f;
  EXPECT_DOUBLE_EQ(b.x_tilde_a, 40.0);
  EXPECT_TRUE(b.cautious_feasible);
  EXPECT_NEAR(b.x_hat_a, 26.235, 1e-3);
  EXPECT_NEAR(b.x_hat_f, 13.125, 1e-3);
}

TEST(Criticality, TopSpeedFrontBoundIsBrakingDistance) {
  for (double x_e : {1.0, 20.0, 300.0}) {
    CriticalBoundary b = most_critical(x_e, 15.0, kStd, kIY);
    EXPECT_DOUBLE_EQ(b.x_hat_f, kStd.braking_distance(15.0));
  }
}

TEST(Criticality, StandingEgoNeverIrrelevant) {
  CriticalBoundary b = most_critical(20.0, 0.0, kStd, kIY);
  EXPECT_TRUE(std::isinf(b.x_tilde_a));
  EXPECT_NE(classify_zone(1e6, 1e6, b), Zone::Irrelevant);
}

TEST(Criticality, FittedProfileReproducesFixtureBoundary) {
  // Profile fitted so that x_e = 11.05, v_e = 5 reaches 6.3 m/s at 2.7 m
  // from the zone exit and the boundary lands on (27.6, 12.6).
  double a = (6.3 * 6.3 - 25.0) / (2.0 * 2.7);
  double va = std::sqrt(25.0 + 2.0 * a * 11.05);
  oracle::Rates probe{a, 1.0, 15.0};
  double vl = 27.6 / oracle::accelerate(11.05, 5.0, probe).t;
  double b = va * va / (2.0 * 12.6);
  ADProfile p = ADProfile::constant_rate(a, b, 15.0);
  StaticPart s = StaticPart::make(ScenarioType::IntersectionYield, 5.0, vl);
  CriticalBoundary cb = most_critical(11.05, 5.0, p, s);
  EXPECT_NEAR(cb.x_hat_a, 27.6, 0.05);
  EXPECT_NEAR(cb.x_hat_f, 12.6, 0.05);
}

TEST(Criticality, Dominance) {
  EXPECT_EQ(dominates(at(20, 10), at(25, 12)), Order::MoreCritical);
  EXPECT_EQ(dominates(at(25, 12), at(20, 10)), Order::LessCritical);
  EXPECT_EQ(dominates(at(20, 12), at(25, 10)), Order::Incomparable);
  EXPECT_EQ(dominates(at(20, 12), at(20, 12)), Order::Equal);
  EXPECT_EQ(dominates(at(20, 12), at(20, 12, 25.0)), Order::Incomparable);
  TestCase other = at(20, 12);
  other.static_part = StaticPart::make(ScenarioType::MergeYield);
  EXPECT_THROW(dominates(at(20, 12), other), DomainError);
}

TEST(Criticality, SequenceDominanceMatchesPoints) {
  auto e1 = expand(at(20, 10), 0.1);
  auto e2 = expand(at(25, 12), 0.1);
  e2.resize(e1.size());
  EXPECT_EQ(dominates(std::span<const EnvState>(e1), std::span<const EnvState>(e2)),
            Order::MoreCritical);
}

TEST(Criticality, Zones) {
  CriticalBoundary b = most_critical(20.0, 5.0, kStd, kIY);
  EXPECT_EQ(classify_zone(b.x_hat_a + 0.1, b.x_hat_f + 0.1, b), Zone::SafeProgress);
  EXPECT_EQ(classify_zone(b.x_hat_a / 2.0, b.x_hat_f + 0.1, b), Zone::CautiousOnly);
  EXPECT_EQ(classify_zone(45.0, 1.0, b), Zone::Irrelevant);
  CriticalBoundary tight = most_critical(10.0, 10.0, kStd, kIY);
  EXPECT_FALSE(tight.cautious_feasible);
  EXPECT_EQ(classify_zone(tight.x_hat_a / 2.0, tight.x_hat_f, tight), Zone::NonNominal);
}

TEST(Criticality, ProbeRing) {
  auto probes = boundary_probe(20.0, 5.0, kStd, kIY, 8, 2.0);
  ASSERT_EQ(probes.size(), 8u);
  CriticalBoundary b = most_critical(20.0, 5.0, kStd, kIY);
  std::set<std::pair<int, int>> offs;
  for (const auto& tc : probes) {
    offs.insert({static_cast<int>(std::lround((tc.x_a - b.x_hat_a) / 2.0)),
                 static_cast<int>(std::lround((tc.x_f - b.x_hat_f) / 2.0))});
    EXPECT_NE(classify_zone(tc, b), Zone::NonNominal);
  }
  EXPECT_EQ(offs.size(), 8u);
  EXPECT_FALSE(offs.count({0, 0}));
}

TEST(Criticality, ProbeDropsNonNominal) {
  for (const auto& tc : boundary_probe(10.0, 10.0, kStd, kIY, 16, 3.0))
    EXPECT_NE(classify_zone(tc, most_critical(10.0, 10.0, kStd, kIY)), Zone::NonNominal);
}
