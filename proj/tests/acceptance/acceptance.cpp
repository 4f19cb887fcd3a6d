// End-to-end acceptance checks. One line per criterion; exit status is the
// number of failing criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "adlab/adlab.hpp"
#include "support/oracles.hpp"

using namespace adlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Result {
  bool ok = true;
  std::string detail;
};

std::vector<double> lin(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

TestCase tc_of(StaticPart s, double x_e, double v_e, double x_a, double x_f) {
  TestCase tc;
  tc.static_part = s;
  tc.x_e = x_e;
  tc.v_e = v_e;
  tc.x_a = x_a;
  tc.x_f = x_f;
  return tc;
}

// A/D closed forms against forward integration; VB composability.
Result ac1() {
  auto t0 = Clock::now();
  const ADProfile p = ADProfile::constant_rate(2.0, 4.0, 15.0);
  const oracle::Rates r{2.0, 4.0, 15.0};
  // Relative 0.1 %, with an absolute floor for values that vanish (VB at the
  // stopping distance, TA at x = 0).
  auto close = [](double got, double want) {
    return std::abs(got - want) <= std::max(1e-3 * std::abs(want), 1e-2);
  };
  double worst = 0.0;
  int bad = 0;
  double worst_comp = 0.0;
  for (double v : lin(0.75, 15.0, 20)) {
    if (!close(p.braking_distance(v), oracle::braking_distance(v, r))) ++bad;
    for (double x : lin(1.0, 40.0, 20)) {
      double vb = p.braking_speed(v, x);
      double ovb = oracle::braking_speed(v, x, r);
      auto acc = oracle::accelerate(x, v, r);
      double ta = p.accel_time(x, v);
      double va = p.accel_speed(x, v);
      bad += !close(vb, ovb) + !close(ta, acc.t) + !close(va, acc.v);
      worst = std::max({worst, std::abs(vb - ovb), std::abs(ta - acc.t), std::abs(va - acc.v)});
      for (double x2 : {0.5 * x, x}) {
        double lhs = p.braking_speed(vb, x2);
        double rhs = p.braking_speed(v, x + x2);
        worst_comp = std::max(worst_comp, std::abs(lhs - rhs));
      }
    }
  }
  double secs = seconds_since(t0);
  Result res;
  res.ok = bad == 0 && worst_comp <= 1e-9 && secs < 5.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "mismatches=%d max_abs_err=%.2e composability=%.1e runtime=%.2fs", bad,
                worst, worst_comp, secs);
  res.detail = buf;
  return res;
}

// Constant-speed collision window on a 50x50 grid of centred distances.
Result ac2() {
  const double d = 5.0, v = 10.0, dt = 0.01;
  StaticPart s = StaticPart::make(ScenarioType::IntersectionYield, d, v);
  ADProfile veh = ADProfile::constant_rate(2.0, 4.0, 15.0);
  SimConfig cfg;
  cfg.dt = dt;
  int far = 0, near = 0, formula = 0;
  for (double xe : lin(10.0, 60.0, 50))
    for (double xa : lin(10.0, 60.0, 50)) {
      bool predicted = std::abs(xe - xa) <= 10.0;
      if (collision_window(xe, v, xa, v, d) != predicted) ++formula;
      TestCase tc = tc_of(s, ego_exit_distance(xe, d), v, arriving_entry_distance(xa, d), 1000.0);
      ConstantSpeedController c;
      bool hit = simulate_with(c, veh, tc, cfg).has(EventKind::CollisionArriving);
      if (hit != predicted) {
        if (std::abs(std::abs(xe - xa) - 10.0) > v * dt + 1e-9) ++far;
        else ++near;
      }
    }
  char buf[160];
  std::snprintf(buf, sizeof buf, "disagreements beyond v*dt=%d within band=%d formula=%d", far, near, formula);
  return {far == 0 && formula == 0, buf};
}

ScenarioType kIYt = ScenarioType::IntersectionYield;

// Empirical boundary: smallest x_a at which Reference passes with progress.
double empirical_x_a(double dt, const CriticalBoundary& b) {
  AutopilotSpec ap = make_autopilot("reference");
  StaticPart s = StaticPart::make(kIYt);
  SimConfig cfg;
  cfg.dt = dt;
  auto passes = [&](double xa) {
    TestCase tc = tc_of(s, 20.0, 5.0, xa, b.x_hat_f + 5.0);
    return verdict(simulate(ap, tc, cfg), Goal::standard(s)).kind == VerdictKind::ProgressPass;
  };
  double lo = b.x_hat_a - 5.0, hi = b.x_hat_a + 5.0;
  if (passes(lo) || !passes(hi)) return std::nan("");
  for (int i = 0; i < 40; ++i) {
    double m = 0.5 * (lo + hi);
    (passes(m) ? hi : lo) = m;
  }
  return hi;
}

Result ac3() {
  AutopilotSpec ap = make_autopilot("reference");
  StaticPart s = StaticPart::make(kIYt);
  CriticalBoundary b = most_critical(20.0, 5.0, ap.profile, s);
  auto o = oracle::boundary(20.0, 5.0, s.vl, {2.0, 4.0, 15.0});
  bool values = std::abs(b.x_hat_a - o.x_hat_a) <= 1e-3 && std::abs(b.x_hat_f - o.x_hat_f) <= 1e-3 &&
                std::abs(b.x_hat_a - 26.235) <= 1e-3 && std::abs(b.x_hat_f - 13.125) <= 1e-3;
  Goal g = Goal::standard(s);
  Verdict above = verdict(simulate(ap, tc_of(s, 20.0, 5.0, b.x_hat_a + 0.5, b.x_hat_f + 0.5)), g);
  Verdict below = verdict(simulate(ap, tc_of(s, 20.0, 5.0, b.x_hat_a - 1.0, b.x_hat_f)), g);
  double e1 = empirical_x_a(0.1, b);
  double e2 = empirical_x_a(0.05, b);
  double shift = std::abs(e1 - e2);
  bool ok = values && above.kind == VerdictKind::ProgressPass && below.kind != VerdictKind::ProgressPass &&
            shift <= s.vl * 0.1;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "x_hat_a=%.4f x_hat_f=%.4f (oracle %.4f %.4f) +0.5:%s -1:%s boundary dt=0.1:%.3f dt=0.05:%.3f shift=%.3f",
                b.x_hat_a, b.x_hat_f, o.x_hat_a, o.x_hat_f, to_string(above).c_str(),
                to_string(below).c_str(), e1, e2, shift);
  return {ok, buf};
}

// Rationality on the default 20x20 grids.
Result ac4() {
  GridSpec g;
  SimConfig cfg;
  int ref_is = 0, irr_in = 0, irr_out = 0, irr_other = 0;
  AutopilotEntry ref{"reference", make_autopilot("reference")};
  AutopilotEntry irr{"irrational", make_autopilot("irrational")};
  const auto& region = std::get<variant::Irrational>(irr.builtin->variant);
  for (auto t : kAllScenarioTypes) {
    StaticPart s = StaticPart::make(t);
    for (double v : {4.0, 6.0, 8.0, 10.0}) {
      GridRun r = run_grid(ref, g, s, 25.0, v, cfg);
      ref_is += r.state.all.is + static_cast<int>(rationality_check(r.grid).size());
      GridRun q = run_grid(irr, g, s, 25.0, v, cfg);
      for (const auto& w : rationality_check(q.grid)) {
        bool inside = region.contains(w.fail_x_a, w.fail_x_f, q.grid.boundary);
        if (t != ScenarioType::LaneChange) ++irr_other;
        else if (inside) ++irr_in;
        else ++irr_out;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "reference IS=%d irrational witnesses inside=%d outside=%d other types=%d",
                ref_is, irr_in, irr_out, irr_other);
  return {ref_is == 0 && irr_in >= 1 && irr_out == 0 && irr_other == 0, buf};
}

Result ac5() {
  auto ref = determinacy_check_braking(make_autopilot("reference"), 15.0, 200.0, 5);
  auto nd = determinacy_check_braking(make_autopilot("nondeterminate_brake"), 30.0, 200.0, 5);
  // Restart after 0.5 s at 5 m/s^2 (27.5 m/s), then 3 m/s^2 to rest.
  double x5 = 30.0 * 0.5 - 0.5 * 5.0 * 0.25;
  double predicted = oracle::two_phase_stop(x5, 27.5, 3.0, 0.0, 3.0) - oracle::two_phase_stop(0.0, 30.0, 5.0, 0.0, 5.0);
  bool ok = ref.determinate && ref.max_deviation <= 15.0 * 0.1 + 0.25 && !nd.determinate &&
            nd.max_deviation >= 20.0 && std::abs(nd.max_deviation - predicted) <= 0.05;
  char buf[200];
  std::snprintf(buf, sizeof buf, "reference max_dev=%.3f m nondeterminate_brake max_dev=%.3f m (oracle %.3f)",
                ref.max_deviation, nd.max_deviation, predicted);
  return {ok, buf};
}

// Fixture with the published progress-determinacy geometry.
Result ac6() {
  double a = (6.3 * 6.3 - 25.0) / (2.0 * 2.7);
  double va = std::sqrt(25.0 + 2.0 * a * 11.05);
  double vl = 27.6 / oracle::accelerate(11.05, 5.0, {a, 1.0, 15.0}).t;
  double b = va * va / (2.0 * 12.6);
  ADProfile p = ADProfile::constant_rate(a, b, 15.0);
  StaticPart s = StaticPart::make(kIYt, 5.0, vl);
  CriticalBoundary cb = most_critical(11.05, 5.0, p, s);
  TestCase orig = tc_of(s, 11.05, 5.0, 27.6, 12.6);
  TestCase restart = tc_of(s, 11.05 - 2.7, 6.3, 20.75, 12.6);
  AutopilotSpec ref{"reference", p, variant::Reference{}};
  AutopilotSpec nda{"nondeterminate_accel", p, variant::NonDeterminateAccel{RateTable({{5.0, a}, {6.3, 0.5}})}};
  Goal g = Goal::standard(s);
  Verdict r0 = verdict(simulate(ref, orig), g), r1 = verdict(simulate(ref, restart), g);
  Verdict n0 = verdict(simulate(nda, orig), g), n1 = verdict(simulate(nda, restart), g);
  bool ok = std::abs(cb.x_hat_a - 27.6) < 0.05 && std::abs(cb.x_hat_f - 12.6) < 0.05 &&
            r0.kind == VerdictKind::ProgressPass && r1.kind == VerdictKind::ProgressPass &&
            n0.kind == VerdictKind::ProgressPass && n1.reason == "NoCollisionArriving";
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "boundary=(%.2f, %.2f) reference: %s / %s  nondeterminate_accel: %s / %s", cb.x_hat_a,
                cb.x_hat_f, to_string(r0).c_str(), to_string(r1).c_str(), to_string(n0).c_str(),
                to_string(n1).c_str());
  return {ok, buf};
}

Result ac7() {
  ADProfile p = ADProfile::constant_rate(2.0, 4.0, 15.0);
  StaticPart s = StaticPart::make(kIYt);
  std::vector<std::vector<double>> parts{{10.0, 5.0}, {10.0, 7.5, 5.0}, {10.0, 8.75, 7.5, 6.25, 5.0}};
  std::vector<double> ratios;
  double worst_half = 0.0;
  for (const auto& sp : parts) {
    SpeedPartition part = build_partition(20.0, sp, p, s);
    double r = coverage_ratio(part, std::nullopt, 200).ratio;
    worst_half = std::max(worst_half, std::abs(r - coverage_ratio(part, std::nullopt, 400).ratio));
    ratios.push_back(r);
  }
  bool increasing = ratios[0] < ratios[1] && ratios[1] < ratios[2];
  SpeedPartition part = build_partition(20.0, parts[0], p, s);
  double cap = default_x_f_cap(part);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uv(5.0, 10.0), ua(0.0, 40.0), uf(0.0, cap);
  int covered_n = 0, bad = 0;
  for (int i = 0; i < 100000; ++i) {
    double v = uv(rng), xa = ua(rng), xf = uf(rng);
    if (!covered(part, v, xa, xf)) continue;
    ++covered_n;
    auto o = oracle::boundary(20.0, v, s.vl, {2.0, 4.0, 15.0});
    // the oracle boundary carries integration error of about 1e-3 m
    if (xa < o.x_hat_a - 1e-2 || xf < o.x_hat_f - 1e-2 || xa > o.x_tilde_a) ++bad;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "ratios=%.4f<%.4f<%.4f half-step=%.1e covered samples=%d unsafe=%d",
                ratios[0], ratios[1], ratios[2], worst_half, covered_n, bad);
  return {increasing && worst_half <= 1e-2 && bad == 0 && covered_n > 0, buf};
}

Result ac8() {
  auto t0 = Clock::now();
  CampaignConfig c = default_campaign_config();
  CampaignResult first = run_campaign(c);
  double secs = seconds_since(t0);
  CampaignResult second = run_campaign(c);
  bool same = true;
  for (auto f : {ReportFormat::Markdown, ReportFormat::Json, ReportFormat::Csv})
    same &= render_report(first.report, f) == render_report(second.report, f);
  bool no_non_nominal = true;
  for (const auto& run : second.runs)
    for (const auto& pt : run.grid.points) no_non_nominal &= pt.zone != Zone::NonNominal;

  CampaignReport fixture;
  fixture.autopilots = {"Apollo"};
  fixture.types = {kIYt};
  StateResult st;
  st.autopilot = "Apollo";
  st.type = kIYt;
  st.all = {8, 0, 127, 1000};
  fixture.states = {st};
  std::string md = render_report(fixture, ReportFormat::Markdown);
  bool cell = md.find("| Intersection with yield signs | TF (0.80%) IO (12.7%) |\n") != std::string::npos;
  char buf[200];
  std::snprintf(buf, sizeof buf, "identical=%s runtime=%.1fs no NonNominal=%s fixture cell=%s",
                same ? "yes" : "no", secs, no_non_nominal ? "yes" : "no", cell ? "\"TF (0.80%) IO (12.7%)\"" : "wrong");
  return {same && secs < 300.0 && no_non_nominal && cell, buf};
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"A/D closed forms vs integration oracle", ac1},
      {"collision window vs constant-speed simulation", ac2},
      {"boundary tightness under Reference", ac3},
      {"rationality: Reference clean, Irrational confined", ac4},
      {"braking determinacy", ac5},
      {"progress determinacy fixture", ac6},
      {"partition coverage", ac7},
      {"end-to-end campaign", ac8},
  };
  int failed = 0;
  int k = 0;
  for (auto& [name, fn] : criteria) {
    ++k;
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.ok;
    std::printf("AC%d %s  %s  [%s]\n", k, r.ok ? "PASS" : "FAIL", name, r.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
