// adlab command line: boundary computation, single simulations, campaigns,
// determinacy checks, partition coverage and report regeneration.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adlab/adlab.hpp"

using namespace adlab;

namespace {

struct ProfileArgs {
  double a_max = 2.0;
  double b_max = 4.0;
  double v_max = 15.0;
  void add(CLI::App* app) {
    app->add_option("--a-max", a_max, "maximum acceleration (m/s^2)")->capture_default_str();
    app->add_option("--b-max", b_max, "maximum deceleration (m/s^2)")->capture_default_str();
    app->add_option("--v-max", v_max, "maximum speed (m/s)")->capture_default_str();
  }
  ADProfile profile() const { return ADProfile::constant_rate(a_max, b_max, v_max); }
};

struct CaseArgs {
  std::string type = "intersection_yield";
  double d = 5.0;
  double vl = 10.0;
  double x_e = 20.0;
  double v_e = 5.0;
  double x_a = 30.0;
  double x_f = 15.0;
  std::string file;
  void add(CLI::App* app, bool env) {
    app->add_option("--type", type, "scenario type")->capture_default_str();
    app->add_option("--d", d, "critical zone half-length (m)")->capture_default_str();
    app->add_option("--vl", vl, "arriving vehicle speed (m/s)")->capture_default_str();
    app->add_option("--x-e", x_e, "ego distance to the zone exit (m)")->capture_default_str();
    app->add_option("--v-e", v_e, "ego initial speed (m/s)")->capture_default_str();
    if (env) {
      app->add_option("--x-a", x_a, "arriving distance to the zone entry (m)")->capture_default_str();
      app->add_option("--x-f", x_f, "front vehicle distance beyond the zone exit (m)")->capture_default_str();
      app->add_option("--testcase", file, "test case JSON file (overrides the flags)");
    }
  }
  StaticPart static_part() const { return StaticPart::make(scenario_type_from_string(type), d, vl); }
  TestCase testcase() const {
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw ConfigError("cannot open test case '" + file + "'");
      return testcase_from_json(json::parse(in));
    }
    return TestCase{static_part(), x_e, v_e, x_a, x_f};
  }
};

std::string default_out() {
  const char* e = std::getenv("ADLAB_OUT");
  return e && *e ? e : "adlab_out";
}

int run(int argc, char** argv) {
  CLI::App app{"adlab: adverse-scenario testing of autopilot decision policies"};
  app.require_subcommand(1);
  double dt = 0.1;
  app.add_option("--dt", dt, "simulation step (s)")->capture_default_str();

  // critical
  auto* crit = app.add_subcommand("critical", "most critical test case for an ego initial state");
  ProfileArgs crit_p;
  CaseArgs crit_c;
  crit_p.add(crit);
  crit_c.add(crit, false);
  std::optional<double> crit_xa, crit_xf;
  crit->add_option("--x-a", crit_xa, "also classify this arriving distance");
  crit->add_option("--x-f", crit_xf, "also classify this front distance");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one test case against an autopilot");
  std::string sim_ap = "reference";
  std::string sim_fmt = "json";
  CaseArgs sim_c;
  sim->add_option("--autopilot", sim_ap, "builtin id or exec:<command>")->capture_default_str();
  sim->add_option("--format", sim_fmt, "json or csv")->capture_default_str();
  sim_c.add(sim, true);

  // campaign
  auto* camp = app.add_subcommand("campaign", "run a full test campaign");
  std::string camp_cfg;
  std::optional<std::uint64_t> camp_seed;
  std::optional<int> camp_workers;
  std::string camp_out;
  std::string camp_fmt = "markdown";
  camp->add_option("--config", camp_cfg, "campaign config (JSON); defaults if omitted");
  camp->add_option("--seed", camp_seed, "sampling seed");
  camp->add_option("--workers", camp_workers, "worker threads (0: all cores)");
  camp->add_option("--out", camp_out, "output directory (default $ADLAB_OUT or ./adlab_out)");
  camp->add_option("--format", camp_fmt, "report printed to stdout: csv, json or markdown")->capture_default_str();

  // determinacy
  auto* det = app.add_subcommand("determinacy", "restart an autopilot from states of its own trace");
  std::string det_ap = "reference";
  std::string det_kind = "braking";
  double det_v0 = 15.0;
  double det_xf = 200.0;
  int det_every = 5;
  CaseArgs det_c;
  det->add_option("--autopilot", det_ap, "builtin id")->capture_default_str();
  det->add_option("--maneuver", det_kind, "braking or progress")->capture_default_str();
  det->add_option("--v0", det_v0, "braking: initial speed (m/s)")->capture_default_str();
  det->add_option("--front", det_xf, "braking: standing vehicle distance (m)")->capture_default_str();
  det->add_option("--every", det_every, "restart every k steps")->capture_default_str();
  det_c.add(det, true);

  // partition
  auto* part = app.add_subcommand("partition", "coverage ratio of a speed partition");
  ProfileArgs part_p;
  CaseArgs part_c;
  std::vector<double> part_speeds{10.0, 5.0};
  int part_steps = 200;
  std::optional<double> part_cap;
  std::string part_env;
  part_p.add(part);
  part_c.add(part, false);
  part->add_option("--speeds", part_speeds, "strictly decreasing speeds")->capture_default_str();
  part->add_option("--steps", part_steps, "integration steps per axis")->capture_default_str();
  part->add_option("--x-f-cap", part_cap, "upper x_f bound of the test space");
  part->add_option("--envelope", part_env, "write the envelope/staircase CSV here");

  // report
  auto* rep = app.add_subcommand("report", "regenerate the report from a campaign directory");
  std::string rep_out;
  std::string rep_fmt = "markdown";
  rep->add_option("--out", rep_out, "campaign output directory (default $ADLAB_OUT or ./adlab_out)");
  rep->add_option("--format", rep_fmt, "csv, json or markdown")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  SimConfig cfg;
  cfg.dt = dt;

  if (*crit) {
    StaticPart s = crit_c.static_part();
    CriticalBoundary b = most_critical(crit_c.x_e, crit_c.v_e, crit_p.profile(), s);
    json j = boundary_json(b);
    if (crit_xa && crit_xf) j["zone"] = to_string(classify_zone(*crit_xa, *crit_xf, b));
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (*sim) {
    TestCase tc = sim_c.testcase();
    AutopilotEntry e = detail::autopilot_from_json(json(sim_ap), ADProfile::constant_rate(2.0, 4.0, 15.0));
    SimOutcome o = simulate_entry(e, tc, cfg);
    Verdict v = verdict(o, Goal::standard(tc.static_part));
    if (sim_fmt == "csv") {
      write_scenario_csv(o.scenario, std::cout);
    } else if (sim_fmt == "json") {
      json j = to_json(o);
      j["verdict"] = to_string(v);
      std::cout << j.dump(2) << '\n';
    } else {
      throw ConfigError("unknown format '" + sim_fmt + "' (expected json or csv)");
    }
    std::cerr << "verdict: " << to_string(v) << '\n';
    return v.pass() ? 0 : 2;
  }
  if (*camp) {
    ReportFormat fmt = report_format_from_string(camp_fmt);
    CampaignConfig c = camp_cfg.empty() ? default_campaign_config() : load_campaign_config(camp_cfg);
    if (camp_seed) c.seed = *camp_seed;
    if (camp_workers) c.workers = *camp_workers;
    if (!camp_out.empty()) c.output_dir = camp_out;
    if (c.output_dir.empty()) c.output_dir = default_out();
    CampaignResult res = run_campaign(c);
    write_campaign_outputs(res, c.output_dir);
    std::cout << render_report(res.report, fmt);
    return res.report.any_failure() ? 2 : 0;
  }
  if (*det) {
    AutopilotSpec ap = make_autopilot(det_ap);
    DeterminacyReport r;
    if (det_kind == "braking") {
      r = determinacy_check_braking(ap, det_v0, det_xf, det_every, std::nullopt, cfg);
    } else if (det_kind == "progress") {
      r = determinacy_check_progress(ap, det_c.testcase(), det_every, 0.2, cfg);
    } else {
      throw ConfigError("unknown maneuver '" + det_kind + "' (expected braking or progress)");
    }
    std::cout << to_json(r).dump(2) << '\n';
    return r.determinate ? 0 : 2;
  }
  if (*part) {
    SpeedPartition sp = build_partition(part_c.x_e, part_speeds, part_p.profile(), part_c.static_part());
    CoverageResult cr = coverage_ratio(sp, part_cap, part_steps);
    json j = to_json(sp);
    j["coverage"] = to_json(cr);
    std::cout << j.dump(2) << '\n';
    if (!part_env.empty()) {
      std::ofstream out(part_env);
      if (!out) throw ConfigError("cannot write '" + part_env + "'");
      write_envelope_csv(sp, out);
    }
    return 0;
  }
  if (*rep) {
    CampaignReport r = load_campaign_report(rep_out.empty() ? default_out() : rep_out);
    std::cout << render_report(r, rep_fmt);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
