#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "adlab/partition.hpp"
#include "support/oracles.hpp"

using namespace adlab;

namespace {

const StaticPart kIY = StaticPart::make(ScenarioType::IntersectionYield);
const ADProfile kStd = ADProfile::constant_rate(2.0, 4.0, 15.0);

}  // namespace

TEST(Partition, NeedsAnInterval) {
  EXPECT_THROW(build_partition(20.0, {10.0}, kStd, kIY), DomainError);
  EXPECT_THROW(build_partition(20.0, {5.0, 10.0}, kStd, kIY), DomainError);
  EXPECT_THROW(build_partition(20.0, {20.0, 10.0}, kStd, kIY), DomainError);
}

TEST(Partition, CornerOfSingleInterval) {
  auto part = build_partition(20.0, {10.0, 5.0}, kStd, kIY);
  ASSERT_EQ(part.corners.size(), 1u);
  auto lo = oracle::boundary(20.0, 5.0, 10.0, {2.0, 4.0, 15.0});
  auto hi = oracle::boundary(20.0, 10.0, 10.0, {2.0, 4.0, 15.0});
  EXPECT_TRUE(oracle::rel_close(part.corners[0].x_a, lo.x_hat_a));
  EXPECT_TRUE(oracle::rel_close(part.corners[0].x_f, hi.x_hat_f));
  EXPECT_NEAR(part.corners[0].x_a, 26.235, 1e-3);
  EXPECT_NEAR(part.corners[0].x_f, 22.5, 1e-9);
}

TEST(Partition, CornersMonotone) {
  auto part = build_partition(25.0, {15.0, 12.0, 9.0, 6.0, 3.0}, kStd, kIY);
  for (std::size_t i = 1; i < part.corners.size(); ++i) {
    // slower intervals need a farther arriving vehicle but less front room
    EXPECT_GE(part.corners[i].x_a, part.corners[i - 1].x_a);
    EXPECT_LE(part.corners[i].x_f, part.corners[i - 1].x_f);
  }
}

TEST(Partition, DegenerateIntervalCoversAll) {
  auto part = build_partition(20.0, {10.0, 10.0 - 1e-6}, kStd, kIY);
  EXPECT_NEAR(coverage_ratio(part).ratio, 1.0, 1e-3);
}

TEST(Partition, RefinementIncreasesRatio) {
  double r2 = coverage_ratio(build_partition(20.0, {10.0, 5.0}, kStd, kIY)).ratio;
  double r3 = coverage_ratio(build_partition(20.0, {10.0, 7.5, 5.0}, kStd, kIY)).ratio;
  double r5 = coverage_ratio(build_partition(20.0, {10.0, 8.75, 7.5, 6.25, 5.0}, kStd, kIY)).ratio;
  EXPECT_LT(r2, r3);
  EXPECT_LT(r3, r5);
  EXPECT_LE(r5, 1.0);
}

TEST(Partition, StepHalvingConverges) {
  auto part = build_partition(20.0, {10.0, 7.5, 5.0}, kStd, kIY);
  EXPECT_LE(std::abs(coverage_ratio(part, std::nullopt, 200).ratio -
                     coverage_ratio(part, std::nullopt, 400).ratio),
            1e-2);
}

TEST(Partition, CoveredImpliesSafe) {
  auto part = build_partition(20.0, {10.0, 7.5, 5.0}, kStd, kIY);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uv(5.0, 10.0), ua(0.0, 60.0), uf(0.0, 60.0);
  for (int i = 0; i < 5000; ++i) {
    double v = uv(rng), xa = ua(rng), xf = uf(rng);
    if (covered(part, v, xa, xf)) {
      EXPECT_TRUE(exact_safe(part, v, xa, xf));
    }
  }
}

TEST(Partition, CoverageErrors) {
  EXPECT_THROW(coverage_ratio(build_partition(20.0, {10.0, 0.0}, kStd, kIY)), DomainError);
  EXPECT_THROW(coverage_ratio(build_partition(20.0, {10.0, 5.0}, kStd, kIY), 1.0), DomainError);
}

TEST(Partition, EnvelopeCsv) {
  std::ostringstream out;
  write_envelope_csv(build_partition(20.0, {10.0, 5.0}, kStd, kIY), out, 4);
  std::string s = out.str();
  EXPECT_EQ(s.rfind("v,x_hat_a,x_hat_f,corner_x_a,corner_x_f\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
}
