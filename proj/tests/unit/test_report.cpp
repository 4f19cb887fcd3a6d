#include <gtest/gtest.h>

#include "adlab/report.hpp"

using namespace adlab;

namespace {

StateResult state(const std::string& ap, ScenarioType t, int tf, int is, int io, int total,
                  OverallFailure of = OverallFailure::None) {
  StateResult s;
  s.autopilot = ap;
  s.type = t;
  s.x_e = 25.0;
  s.v_e = 5.0;
  s.overall = of;
  s.all = {tf, is, io, total};
  s.relevant = s.all;
  return s;
}

}  // namespace

TEST(Report, ApolloCell) {
  Cell c;
  c.tf = 8;
  c.io = 127;
  c.total = 1000;
  c.states = 4;
  EXPECT_EQ(render_cell(c), "TF (0.80%) IO (12.7%)");
}

TEST(Report, CellForms) {
  Cell pass;
  pass.total = 100;
  EXPECT_EQ(render_cell(pass), "PASS");
  Cell of;
  of.of_pd = 2;
  of.states = 4;
  EXPECT_EQ(render_cell(of), "OF-PD (2/4)");
  Cell err;
  err.protocol_error = true;
  EXPECT_EQ(render_cell(err), "protocol-error");
  Cell mixed;
  mixed.tf = 1;
  mixed.is = 3;
  mixed.total = 200;
  mixed.of_sf = 1;
  mixed.states = 3;
  EXPECT_EQ(render_cell(mixed), "TF (0.50%) IS (1.5%) OF-SF (1/3)");
}

TEST(Report, PublishedCellsRoundTrip) {
  for (std::string s : {"TF (71.5%)", "TF (0.80%) IO (12.7%)", "OF-PD (2/4)", "PASS",
                        "IS (3.0%) OF-SF (1/4)"}) {
    EXPECT_EQ(render_cell(parse_cell(s)), s);
  }
  auto c = parse_cell("TF (71.5%)");
  ASSERT_EQ(c.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(*c.entries[0].pct, 71.5);
  EXPECT_THROW(parse_cell("TF 71.5%"), ConfigError);
}

TEST(Report, AggregationSkipsOverallFailures) {
  std::vector<StateResult> ss{state("a", ScenarioType::LaneChange, 2, 0, 0, 100),
                              state("a", ScenarioType::LaneChange, 50, 0, 0, 100, OverallFailure::OFPD),
                              state("a", ScenarioType::MergeYield, 1, 0, 0, 100)};
  Cell c = aggregate_cell(ss, "a", ScenarioType::LaneChange);
  EXPECT_EQ(c.total, 100);
  EXPECT_EQ(c.tf, 2);
  EXPECT_EQ(c.of_pd, 1);
  EXPECT_EQ(c.states, 2);
  EXPECT_EQ(render_cell(c), "TF (2.0%) OF-PD (1/2)");
}

TEST(Report, EmptyReportHeadersOnly) {
  CampaignReport r;
  std::string md = render_report(r, ReportFormat::Markdown);
  EXPECT_EQ(md.rfind("| Scenario |", 0), 0u);
  EXPECT_EQ(md.find("Lane Change"), std::string::npos);
  EXPECT_EQ(render_report(r, ReportFormat::Csv), "scenario_type\n");
}

TEST(Report, OneCellOneRow) {
  CampaignReport r;
  r.autopilots = {"reference"};
  r.types = {ScenarioType::LaneChange};
  r.states = {state("reference", ScenarioType::LaneChange, 8, 0, 127, 1000)};
  EXPECT_EQ(render_report(r, ReportFormat::Csv),
            "scenario_type,reference\nLane Change,TF (0.80%) IO (12.7%)\n");
  std::string md = render_report(r, "markdown");
  EXPECT_NE(md.find("| Lane Change | TF (0.80%) IO (12.7%) |"), std::string::npos);
  json j = json::parse(render_report(r, ReportFormat::Json));
  EXPECT_EQ(j["autopilots"][0], "reference");
  EXPECT_TRUE(r.any_failure());
}

TEST(Report, FormatNames) {
  EXPECT_EQ(report_format_from_string("md"), ReportFormat::Markdown);
  EXPECT_EQ(report_format_from_string("csv"), ReportFormat::Csv);
  EXPECT_THROW(report_format_from_string("xml"), ConfigError);
  CampaignReport r;
  EXPECT_THROW(render_report(r, "html"), ConfigError);
}

TEST(Report, StateJsonRoundTrip) {
  StateResult s = state("x", ScenarioType::IntersectionLight, 1, 2, 3, 40, OverallFailure::OFSF);
  s.witnesses = 2;
  StateResult b = state_from_json(state_to_json(s));
  EXPECT_EQ(b.autopilot, "x");
  EXPECT_EQ(b.type, s.type);
  EXPECT_EQ(b.overall, OverallFailure::OFSF);
  EXPECT_EQ(b.all.io, 3);
  EXPECT_EQ(b.witnesses, 2);
}
