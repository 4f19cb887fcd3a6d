#pragma once

// Grid-level failure taxonomy, rationality witnesses, determinacy checks and
// logical-equivalence checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "adlab/autopilot.hpp"
#include "adlab/criticality.hpp"
#include "adlab/errors.hpp"
#include "adlab/scenario.hpp"
#include "adlab/simulator.hpp"

namespace adlab {

struct GridPoint {
  double x_a = 0.0;
  double x_f = 0.0;
  Zone zone = Zone::SafeProgress;
  std::optional<Verdict> verdict;  // empty until simulated
};

struct GridResult {
  StaticPart static_part;
  double x_e = 0.0;
  double v_e = 0.0;
  double dt = 0.1;
  CriticalBoundary boundary;
  std::vector<GridPoint> points;
};

enum class Label { Pass, CautiousPass, TF, IS, IO };
enum class OverallFailure { None, OFPD, OFSF };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::Pass: return "Pass";
    case Label::CautiousPass: return "CautiousPass";
    case Label::TF: return "TF";
    case Label::IS: return "IS";
    case Label::IO: return "IO";
  }
  return "?";
}

inline const char* to_string(OverallFailure o) {
  switch (o) {
    case OverallFailure::None: return "none";
    case OverallFailure::OFPD: return "OF-PD";
    case OverallFailure::OFSF: return "OF-SF";
  }
  return "?";
}

struct LabeledPoint {
  double x_a = 0.0;
  double x_f = 0.0;
  Zone zone = Zone::SafeProgress;
  Verdict verdict;
  Label label = Label::Pass;
};

struct LabelCounts {
  int tf = 0;
  int is = 0;
  int io = 0;
  int total = 0;
};

struct Classification {
  OverallFailure overall = OverallFailure::None;
  std::vector<LabeledPoint> points;  // sorted by (x_a, x_f)
  LabelCounts all;                   // denominators: every grid point
  LabelCounts relevant;              // denominators: non-irrelevant points

  double freq(Label l, bool relevant_only = false) const {
    const auto& c = relevant_only ? relevant : all;
    if (c.total == 0) return 0.0;
    int k = l == Label::TF ? c.tf : l == Label::IS ? c.is : l == Label::IO ? c.io : 0;
    return static_cast<double>(k) / c.total;
  }
};

// Margin beyond the boundary under which caution is still legitimate.
inline double io_margin(const GridResult& gr) { return 2.0 * gr.static_part.vl * gr.dt; }

namespace detail {

inline std::vector<LabeledPoint> sorted_points(const GridResult& gr) {
  if (gr.points.empty()) throw AnalysisError("classify_grid: empty grid");
  std::vector<LabeledPoint> pts;
  pts.reserve(gr.points.size());
  for (const auto& p : gr.points) {
    if (!p.verdict) throw AnalysisError("classify_grid: incomplete grid, point without verdict");
    pts.push_back({p.x_a, p.x_f, p.zone, *p.verdict, Label::Pass});
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.x_a, a.x_f) < std::tie(b.x_a, b.x_f);
  });
  return pts;
}

// Index of a progress-pass point strictly more critical than pts[i], if any.
inline std::optional<std::size_t> dominating_pass(const std::vector<LabeledPoint>& pts,
                                                  std::size_t i) {
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (pts[j].verdict.kind != VerdictKind::ProgressPass) continue;
    if (compare_points(pts[j].x_a, pts[j].x_f, pts[i].x_a, pts[i].x_f) == Order::MoreCritical)
      return j;
  }
  return std::nullopt;
}

}  // namespace detail

inline Classification classify_grid(const GridResult& gr) {
  Classification c;
  c.points = detail::sorted_points(gr);
  auto& pts = c.points;

  bool all_fail = true;
  bool any_safe = false;
  bool safe_progress = false;
  for (const auto& p : pts) {
    if (p.verdict.pass()) all_fail = false;
    if (p.zone == Zone::SafeProgress) {
      any_safe = true;
      if (p.verdict.kind == VerdictKind::ProgressPass) safe_progress = true;
    }
  }
  if (all_fail) c.overall = OverallFailure::OFSF;
  else if (any_safe && !safe_progress) c.overall = OverallFailure::OFPD;

  const double delta = io_margin(gr);
  const auto& b = gr.boundary;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto& p = pts[i];
    switch (p.verdict.kind) {
      case VerdictKind::Fail:
        p.label = detail::dominating_pass(pts, i) ? Label::IS : Label::TF;
        break;
      case VerdictKind::CautiousPass: {
        double margin = std::min(p.x_a - b.x_hat_a, p.x_f - b.x_hat_f);
        p.label = p.zone == Zone::SafeProgress && margin > delta ? Label::IO : Label::CautiousPass;
        break;
      }
      case VerdictKind::ProgressPass:
        p.label = Label::Pass;
        break;
    }
  }
  for (const auto& p : pts) {
    for (auto* cnt : {&c.all, &c.relevant}) {
      if (cnt == &c.relevant && p.zone == Zone::Irrelevant) continue;
      ++cnt->total;
      if (p.label == Label::TF) ++cnt->tf;
      if (p.label == Label::IS) ++cnt->is;
      if (p.label == Label::IO) ++cnt->io;
    }
  }
  return c;
}

struct RationalityWitness {
  double pass_x_a, pass_x_f;
  double fail_x_a, fail_x_f;
};

// One witness per failing point that is less critical than a passing one.
inline std::vector<RationalityWitness> rationality_check(const GridResult& gr) {
  auto pts = detail::sorted_points(gr);
  std::vector<RationalityWitness> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].verdict.kind != VerdictKind::Fail) continue;
    if (auto j = detail::dominating_pass(pts, i))
      out.push_back({pts[*j].x_a, pts[*j].x_f, pts[i].x_a, pts[i].x_f});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Determinacy.

enum class Maneuver { Braking, Progress };

struct Restart {
  int frame = 0;
  double x = 0.0;
  double v = 0.0;
  double deviation = 0.0;
  bool passed = true;
  bool trivial = false;  // restart beyond the decisive part of the trace
};

struct DeterminacyReport {
  Maneuver maneuver = Maneuver::Braking;
  std::vector<Restart> restarts;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool determinate = true;
  double reference_value = 0.0;  // stop position or conflict-point speed
};

// Braking from v0 with the zone behind and a standing vehicle x_f ahead.
inline DeterminacyReport determinacy_check_braking(const AutopilotSpec& ap, double v0, double x_f,
                                                   int restart_every,
                                                   std::optional<double> tol = std::nullopt,
                                                   const SimConfig& cfg = {},
                                                   StaticPart s = StaticPart::make(
                                                       ScenarioType::IntersectionYield)) {
  if (!(v0 > 0.0) || !(x_f > 0.0) || restart_every < 1)
    throw DomainError("determinacy_check_braking: need v0 > 0, x_f > 0, restart_every >= 1");
  const double dt = cfg.dt;
  int n = static_cast<int>(std::ceil(4.0 * x_f / v0 / dt)) + 50;
  EnvState e;
  e.front = VehicleState{x_f, 0.0};
  s.light.reset();
  std::vector<EnvState> env(static_cast<std::size_t>(n) + 1, e);
  std::span<const EnvState> envs(env);

  BuiltinController c0(ap);
  SimOutcome orig = run_closed_loop(c0, ap.profile, s, envs, EgoState{0.0, v0}, 0.0, cfg);
  if (orig.has(EventKind::CollisionFront))
    throw AnalysisError("determinacy_check_braking: original braking run collides with the front vehicle");
  if (!orig.has(EventKind::StoppedAfterConflict))
    throw AnalysisError("determinacy_check_braking: original run does not stop within the horizon");
  double stop = orig.scenario.frames.back().ego.x;

  DeterminacyReport rep;
  rep.maneuver = Maneuver::Braking;
  rep.tolerance = tol.value_or(v0 * dt + 0.25);
  rep.reference_value = stop;
  int last = static_cast<int>(orig.scenario.frames.size()) - 1;
  for (int i = 0; i <= last; i += restart_every) {
    const auto& f = orig.scenario.frames[static_cast<std::size_t>(i)];
    Restart r{i, f.ego.x, f.ego.v};
    if (f.ego.v == 0.0) {
      r.trivial = true;
      rep.restarts.push_back(r);
      continue;
    }
    BuiltinController c(ap);
    SimOutcome o = run_closed_loop(c, ap.profile, s, envs.subspan(static_cast<std::size_t>(i)),
                                   f.ego, f.t, cfg);
    r.passed = !o.has(EventKind::CollisionFront) && o.has(EventKind::StoppedAfterConflict);
    r.deviation = std::abs(o.scenario.frames.back().ego.x - stop);
    rep.restarts.push_back(r);
  }
  for (const auto& r : rep.restarts) {
    rep.max_deviation = std::max(rep.max_deviation, r.deviation);
    if (!r.passed) rep.determinate = false;
  }
  if (rep.max_deviation > rep.tolerance) rep.determinate = false;
  return rep;
}

// Speed when the ego first passes x = 0, interpolated between frames.
inline std::optional<double> conflict_speed(const Scenario& sc) {
  const auto& f = sc.frames;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].ego.x < 0.0) continue;
    if (i == 0) return f[0].ego.v;
    double x0 = f[i - 1].ego.x;
    double x1 = f[i].ego.x;
    double w = x1 > x0 ? (0.0 - x0) / (x1 - x0) : 1.0;
    return f[i - 1].ego.v + w * (f[i].ego.v - f[i - 1].ego.v);
  }
  return std::nullopt;
}

inline DeterminacyReport determinacy_check_progress(const AutopilotSpec& ap, const TestCase& tc,
                                                    int restart_every, double tol_v = 0.2,
                                                    const SimConfig& cfg = {}) {
  if (restart_every < 1) throw DomainError("determinacy_check_progress: restart_every >= 1");
  auto env = expand(tc, cfg.dt);
  std::span<const EnvState> envs(env);
  Goal g = Goal::standard(tc.static_part);
  BuiltinController c0(ap);
  SimOutcome orig = run_closed_loop(c0, ap.profile, tc.static_part, envs,
                                    EgoState{-tc.x_e, tc.v_e}, 0.0, cfg);
  if (verdict(orig, g).kind != VerdictKind::ProgressPass)
    throw AnalysisError("determinacy_check_progress: original run does not pass with progress");
  double vm = *conflict_speed(orig.scenario);

  DeterminacyReport rep;
  rep.maneuver = Maneuver::Progress;
  rep.tolerance = tol_v;
  rep.reference_value = vm;
  int last = static_cast<int>(orig.scenario.frames.size()) - 1;
  for (int i = 0; i <= last; i += restart_every) {
    const auto& f = orig.scenario.frames[static_cast<std::size_t>(i)];
    Restart r{i, f.ego.x, f.ego.v};
    if (f.ego.x >= 0.0 || i == last) {
      r.trivial = true;
      rep.restarts.push_back(r);
      continue;
    }
    BuiltinController c(ap);
    SimOutcome o = run_closed_loop(c, ap.profile, tc.static_part,
                                   envs.subspan(static_cast<std::size_t>(i)), f.ego, f.t, cfg);
    r.passed = verdict(o, g).kind == VerdictKind::ProgressPass;
    auto v = conflict_speed(o.scenario);
    r.deviation = v ? std::abs(*v - vm) : std::numeric_limits<double>::infinity();
    rep.restarts.push_back(r);
  }
  for (const auto& r : rep.restarts) {
    rep.max_deviation = std::max(rep.max_deviation, r.deviation);
    if (!r.passed) rep.determinate = false;
  }
  if (rep.max_deviation > rep.tolerance) rep.determinate = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Logical equivalence.

struct EquivalenceMismatch {
  std::size_t mutant = 0;
  Verdict original;
  Verdict mutated;
};

inline std::vector<EquivalenceMismatch> equivalence_check(const AutopilotSpec& ap,
                                                          const TestCase& tc,
                                                          std::span<const TestCase> mutants,
                                                          const SimConfig& cfg = {}) {
  std::vector<EquivalenceMismatch> out;
  if (mutants.empty()) return out;
  Goal g = Goal::standard(tc.static_part);
  Verdict v0 = verdict(simulate(ap, tc, cfg), g);
  for (std::size_t i = 0; i < mutants.size(); ++i) {
    Verdict v = verdict(simulate(ap, mutants[i], cfg), g);
    if (!(v == v0)) out.push_back({i, v0, v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

inline json to_json(const DeterminacyReport& r) {
  json j;
  j["maneuver"] = r.maneuver == Maneuver::Braking ? "braking" : "progress";
  j["reference_value"] = r.reference_value;
  j["max_deviation"] = r.max_deviation;
  j["tolerance"] = r.tolerance;
  j["determinate"] = r.determinate;
  json rs = json::array();
  for (const auto& x : r.restarts) {
    json o;
    o["frame"] = x.frame;
    o["x"] = x.x;
    o["v"] = x.v;
    o["deviation"] = std::isfinite(x.deviation) ? json(x.deviation) : json(nullptr);
    o["passed"] = x.passed;
    o["trivial"] = x.trivial;
    rs.push_back(o);
  }
  j["restarts"] = rs;
  return j;
}

inline json boundary_json(const CriticalBoundary& b) {
  json j;
  j["x_hat_a"] = b.x_hat_a;
  j["x_hat_f"] = b.x_hat_f;
  j["x_tilde_a"] = std::isfinite(b.x_tilde_a) ? json(b.x_tilde_a) : json(nullptr);
  j["cautious_feasible"] = b.cautious_feasible;
  return j;
}

inline json to_json(const GridResult& gr, const Classification& c) {
  json j;
  j["scenario_type"] = to_string(gr.static_part.type);
  j["x_e"] = gr.x_e;
  j["v_e"] = gr.v_e;
  j["boundary"] = boundary_json(gr.boundary);
  json g = json::array();
  for (const auto& p : c.points) {
    json o;
    o["x_a"] = p.x_a;
    o["x_f"] = p.x_f;
    o["zone"] = to_string(p.zone);
    o["verdict"] = to_string(p.verdict);
    o["label"] = to_string(p.label);
    g.push_back(o);
  }
  j["grid"] = g;
  j["frequencies"] = {{"TF", c.freq(Label::TF)}, {"IS", c.freq(Label::IS)}, {"IO", c.freq(Label::IO)}};
  j["frequencies_relevant"] = {{"TF", c.freq(Label::TF, true)},
                               {"IS", c.freq(Label::IS, true)},
                               {"IO", c.freq(Label::IO, true)}};
  j["of"] = to_string(c.overall);
  return j;
}

}  // namespace adlab
