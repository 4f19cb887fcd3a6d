#include <gtest/gtest.h>

#include <sstream>

#include "adlab/scenario.hpp"
#include "support/oracles.hpp"

using namespace adlab;

namespace {

TestCase make_tc(double x_e, double v_e, double x_a, double x_f,
                 ScenarioType t = ScenarioType::IntersectionYield) {
  TestCase tc;
  tc.static_part = StaticPart::make(t);
  tc.x_e = x_e;
  tc.v_e = v_e;
  tc.x_a = x_a;
  tc.x_f = x_f;
  return tc;
}

}  // namespace

TEST(Scenario, NamesRoundTrip) {
  for (auto t : kAllScenarioTypes) EXPECT_EQ(scenario_type_from_string(to_string(t)), t);
  EXPECT_THROW(scenario_type_from_string("roundabout"), ConfigError);
  EXPECT_STREQ(display_name(ScenarioType::LaneChange), "Lane Change");
}

TEST(Scenario, ExpandArrivingConstantSpeed) {
  auto env = expand(make_tc(20.0, 5.0, 30.0, 15.0), 0.1);
  ASSERT_GE(env.size(), 31u);
  EXPECT_DOUBLE_EQ(env[0].arriving->x, 30.0);
  EXPECT_NEAR(env[1].arriving->x, 29.0, 1e-12);
  EXPECT_NEAR(env[30].arriving->x, 0.0, 1e-9);
}

TEST(Scenario, ExpandFrontIsStatic) {
  auto env = expand(make_tc(20.0, 5.0, 30.0, 15.0), 0.1);
  for (const auto& e : env) EXPECT_EQ(*e.front, (VehicleState{15.0, 0.0}));
}

TEST(Scenario, ExpandHasNPlusOneFrames) {
  TestCase tc = make_tc(20.0, 5.0, 30.0, 15.0);
  tc.horizon = 60;
  EXPECT_EQ(expand(tc, 0.1).size(), 61u);
  tc.horizon = 10;
  EXPECT_THROW(expand(tc, 0.1), DomainError);
}

TEST(Scenario, MutationOffsetsPreserved) {
  TestCase tc = make_tc(20.0, 5.0, 35.0, 15.0);
  tc.mutations.push_back({Lane::Arriving, 45.0});
  auto env = expand(tc, 0.1);
  for (const auto& e : env) {
    auto arr = e.arriving_all();
    ASSERT_EQ(arr.size(), 2u);
    EXPECT_NEAR(arr[1].x - arr[0].x, 10.0, 1e-9);
  }
}

TEST(Scenario, EquivalenceMutations) {
  TestCase tc = make_tc(20.0, 5.0, 35.0, 15.0);
  auto ms = equivalence_mutations(tc, 10.0);
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].mutations.at(0), (Mutation{Lane::Arriving, 45.0}));
  EXPECT_EQ(ms[1].mutations.at(0), (Mutation{Lane::Front, 25.0}));
  EXPECT_EQ(ms[2].mutations.size(), 2u);
  EXPECT_THROW(equivalence_mutations(tc, 0.0), DomainError);
}

TEST(Scenario, CollisionWindowEqualSpeeds) {
  for (double xe = 20.0; xe <= 60.0; xe += 0.5)
    for (double xa = 20.0; xa <= 60.0; xa += 0.5) {
      if (std::abs(std::abs(xe - xa) - 10.0) < 1e-9) continue;
      EXPECT_EQ(collision_window(xe, 10.0, xa, 10.0, 5.0), std::abs(xe - xa) <= 10.0);
    }
}

TEST(Scenario, CollisionWindowCases) {
  EXPECT_TRUE(collision_window(30.0, 5.0, 60.0, 10.0, 5.0));  // simultaneous arrival
  EXPECT_FALSE(collision_window(40.0, 5.0, 120.0, 10.0, 5.0));
  EXPECT_EQ(collision_window(40.0, 5.0, 120.0, 10.0, 5.0), oracle::cooccupy(40.0, 5.0, 120.0, 10.0, 5.0));
  EXPECT_THROW(collision_window(40.0, 0.0, 120.0, 10.0, 5.0), DomainError);
}

TEST(Scenario, Relevance) {
  EXPECT_FALSE(is_relevant(make_tc(20.0, 5.0, 50.0, 15.0)));
  EXPECT_TRUE(is_relevant(make_tc(20.0, 5.0, 26.2348, 13.125)));
  EXPECT_TRUE(is_relevant(make_tc(20.0, 0.0, 50.0, 15.0)));
}

TEST(Scenario, LightSchedule) {
  LightSchedule ls{10.0, 5.0, 0.0};
  EXPECT_EQ(ls.at(0.0), Light::Green);
  EXPECT_EQ(ls.at(12.0), Light::Red);
  EXPECT_EQ(ls.at(15.0), Light::Green);
  auto s = StaticPart::make(ScenarioType::IntersectionLight);
  EXPECT_TRUE(s.light.has_value());
  EXPECT_FALSE(StaticPart::make(ScenarioType::MergeYield).light.has_value());
}

TEST(Scenario, JsonRoundTrip) {
  TestCase tc = make_tc(20.0, 5.0, 35.0, 15.0, ScenarioType::IntersectionLight);
  tc.mutations.push_back({Lane::Front, 30.0});
  TestCase back = testcase_from_json(to_json(tc));
  EXPECT_EQ(back.static_part, tc.static_part);
  EXPECT_EQ(back.x_a, tc.x_a);
  EXPECT_EQ(back.mutations, tc.mutations);

  Scenario sc{tc.static_part, 0.1, {}};
  auto env = expand(tc, 0.1);
  for (std::size_t i = 0; i < 3; ++i) sc.frames.push_back({i * 0.1, {-20.0 + i, 5.0}, env[i]});
  Scenario sb = scenario_from_json(to_json(sc));
  ASSERT_EQ(sb.frames.size(), 3u);
  EXPECT_EQ(sb.frames[2].env, sc.frames[2].env);
  EXPECT_EQ(sb.frames[2].ego, sc.frames[2].ego);
}

TEST(Scenario, CsvHeader) {
  Scenario sc{StaticPart::make(ScenarioType::MergeYield), 0.1, {}};
  std::ostringstream out;
  write_scenario_csv(sc, out);
  EXPECT_EQ(out.str(), "t,x_e,v_e,x_a,v_a,x_f,light\n");
}

TEST(Scenario, Validation) {
  EXPECT_THROW(make_tc(-1.0, 5.0, 30.0, 15.0).validate(), DomainError);
  EXPECT_THROW(make_tc(20.0, -5.0, 30.0, 15.0).validate(), DomainError);
}
