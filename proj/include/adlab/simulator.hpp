#pragma once

// Discrete-time closed loop: autopilot decisions against a pre-computed
// environment sequence, semi-implicit integration and per-frame event
// detection.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adlab/autopilot.hpp"
#include "adlab/errors.hpp"
#include "adlab/kinematics.hpp"
#include "adlab/scenario.hpp"

namespace adlab {

struct SimConfig {
  double dt = 0.1;
  int max_steps = 100000;
  double zone_epsilon = 0.0;  // widens the zone on both sides when > 0
};

enum class EventKind {
  CollisionArriving,
  CollisionFront,
  RedLightEntry,
  CrossedConflict,
  StoppedBeforeZone,
  YieldedBeforeZone,
  StoppedAfterConflict,
  ClearedRoute,
  HorizonExhausted,
  Aborted,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::CollisionArriving: return "CollisionArriving";
    case EventKind::CollisionFront: return "CollisionFront";
    case EventKind::RedLightEntry: return "RedLightEntry";
    case EventKind::CrossedConflict: return "CrossedConflict";
    case EventKind::StoppedBeforeZone: return "StoppedBeforeZone";
    case EventKind::YieldedBeforeZone: return "YieldedBeforeZone";
    case EventKind::StoppedAfterConflict: return "StoppedAfterConflict";
    case EventKind::ClearedRoute: return "ClearedRoute";
    case EventKind::HorizonExhausted: return "HorizonExhausted";
    case EventKind::Aborted: return "Aborted";
  }
  return "?";
}

struct Event {
  EventKind kind;
  double t = 0.0;
  int frame = 0;
  std::string detail;  // e.g. index of the arriving vehicle hit
};

struct SimOutcome {
  Scenario scenario;
  std::vector<Event> events;
  std::vector<Mode> modes;  // decision mode taken at each simulated step

  bool has(EventKind k) const {
    for (const auto& e : events)
      if (e.kind == k) return true;
    return false;
  }
  const Event* find(EventKind k) const {
    for (const auto& e : events)
      if (e.kind == k) return &e;
    return nullptr;
  }
};

// Built-in autopilot driven through its step function.
class BuiltinController {
 public:
  explicit BuiltinController(const AutopilotSpec& ap) : ap_(ap) {}
  Decision decide(const Scene& sc, const StaticPart& s, double dt) {
    auto [d, m] = step(ap_, sc, s, mem_, dt);
    mem_ = m;
    return d;
  }

 private:
  const AutopilotSpec& ap_;
  Memory mem_;
};

// Ego that never changes its speed.
struct ConstantSpeedController {
  Decision decide(const Scene&, const StaticPart&, double) { return {Mode::Progress, 0.0}; }
};

namespace detail {

inline bool ego_in_zone(double x, const StaticPart& s, double eps) {
  return x >= -s.zone_length() - eps && x <= eps;
}

}  // namespace detail

// Runs controller ctrl from ego0 at time t0 over env (env[i] is the state at
// t0 + i * dt). vehicle bounds commands and speeds.
template <class Controller>
SimOutcome run_closed_loop(Controller& ctrl, const ADProfile& vehicle, const StaticPart& s,
                           std::span<const EnvState> env, EgoState ego0, double t0,
                           const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw DomainError("simulate: dt must be positive");
  if (env.empty()) throw DomainError("simulate: empty environment sequence");
  const double dt = cfg.dt;
  const double eps = cfg.zone_epsilon;
  int n = static_cast<int>(env.size()) - 1;
  if (n > cfg.max_steps)
    throw DomainError("simulate: horizon " + std::to_string(n) + " exceeds max_steps " +
                      std::to_string(cfg.max_steps));

  SimOutcome out;
  out.scenario.static_part = s;
  out.scenario.dt = dt;
  EgoState ego = ego0;
  bool crossed = false;
  bool entered = false;
  bool prev_in = false;
  std::optional<Mode> last_mode;

  for (int i = 0;; ++i) {
    double t = t0 + i * dt;
    const EnvState& e = env[static_cast<std::size_t>(i)];
    out.scenario.frames.push_back({t, ego, e});

    bool in = detail::ego_in_zone(ego.x, s, eps);
    if (in) {
      auto arr = e.arriving_all();
      for (std::size_t k = 0; k < arr.size(); ++k) {
        if (detail::ego_in_zone(arr[k].x, s, eps)) {
          out.events.push_back({EventKind::CollisionArriving, t, i, "vehicle " + std::to_string(k)});
          return out;
        }
      }
    }
    if (auto f = e.nearest_front(); f && ego.x >= *f && ego.v > 0.0) {
      out.events.push_back({EventKind::CollisionFront, t, i, {}});
      return out;
    }
    if (in && !prev_in && e.light == Light::Red)
      out.events.push_back({EventKind::RedLightEntry, t, i, {}});
    if (in || ego.x > eps) entered = true;
    prev_in = in;
    if (!crossed && ego.x > eps) {
      crossed = true;
      out.events.push_back({EventKind::CrossedConflict, t, i, {}});
    }

    if (i >= 1) {
      if (crossed && ego.v == 0.0) {
        out.events.push_back({EventKind::StoppedAfterConflict, t, i, {}});
        return out;
      }
      if (crossed && !e.nearest_front()) {
        out.events.push_back({EventKind::ClearedRoute, t, i, {}});
        return out;
      }
      if (!entered && ego.v == 0.0) {
        out.events.push_back({EventKind::StoppedBeforeZone, t, i, {}});
        return out;
      }
      // Only the primary arriving vehicle is yielded to; vehicles added by
      // equivalence mutations must not change when the scenario ends.
      if (!entered && last_mode == Mode::Cautious) {
        bool gone = !e.arriving || e.arriving->x < -s.zone_length() - eps;
        if (gone && e.light != Light::Red) {
          out.events.push_back({EventKind::YieldedBeforeZone, t, i, {}});
          return out;
        }
      }
    }
    if (i == n) {
      out.events.push_back({EventKind::HorizonExhausted, t, i, {}});
      return out;
    }

    Scene sc{t, ego, e};
    Decision d = ctrl.decide(sc, s, dt);
    if (!std::isfinite(d.command_accel)) {
      out.events.push_back({EventKind::Aborted, t, i, "non-finite command"});
      return out;
    }
    out.modes.push_back(d.mode);
    last_mode = d.mode;
    double a = std::clamp(d.command_accel, -vehicle.b_max(), vehicle.a_max());
    double v1 = std::clamp(ego.v + a * dt, 0.0, vehicle.v_max());
    ego.x = ego.x + 0.5 * (ego.v + v1) * dt;
    ego.v = v1;
  }
}

template <class Controller>
SimOutcome simulate_with(Controller& ctrl, const ADProfile& vehicle, const TestCase& tc,
                         const SimConfig& cfg = {}) {
  auto env = expand(tc, cfg.dt);
  return run_closed_loop(ctrl, vehicle, tc.static_part, std::span<const EnvState>(env),
                         EgoState{-tc.x_e, tc.v_e}, 0.0, cfg);
}

inline SimOutcome simulate(const AutopilotSpec& ap, const TestCase& tc, const SimConfig& cfg = {}) {
  BuiltinController ctrl(ap);
  return simulate_with(ctrl, ap.profile, tc, cfg);
}

// Control policy q[0..]: the ego states of the simulated scenario.
inline std::vector<EgoState> run_policy(const AutopilotSpec& ap, const TestCase& tc,
                                        const SimConfig& cfg = {}) {
  auto o = simulate(ap, tc, cfg);
  std::vector<EgoState> q;
  for (const auto& f : o.scenario.frames) q.push_back(f.ego);
  return q;
}

// ---------------------------------------------------------------------------
// Verdicts.

enum class VerdictKind { ProgressPass, CautiousPass, Fail };

struct Verdict {
  VerdictKind kind = VerdictKind::Fail;
  std::string reason;  // property or target that failed

  bool pass() const { return kind != VerdictKind::Fail; }
  bool operator==(const Verdict&) const = default;
};

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::ProgressPass: return "ProgressPass";
    case VerdictKind::CautiousPass: return "CautiousPass";
    case VerdictKind::Fail: return "Fail";
  }
  return "?";
}

inline std::string to_string(const Verdict& v) {
  if (v.kind != VerdictKind::Fail) return to_string(v.kind);
  return "Fail(" + v.reason + ")";
}

inline Verdict verdict(const SimOutcome& o, const Goal& g) {
  auto fail = [](std::string r) { return Verdict{VerdictKind::Fail, std::move(r)}; };
  if (o.has(EventKind::Aborted)) return fail("Aborted");
  if (o.has(EventKind::CollisionArriving)) {
    if (g.has(Property::NoCollisionArriving)) return fail(to_string(Property::NoCollisionArriving));
    if (g.has(Property::NoZoneCooccupancy)) return fail(to_string(Property::NoZoneCooccupancy));
  }
  if (o.has(EventKind::CollisionFront) && g.has(Property::NoCollisionFront))
    return fail(to_string(Property::NoCollisionFront));
  if (o.has(EventKind::RedLightEntry) && g.has(Property::NoRedLightEntry))
    return fail(to_string(Property::NoRedLightEntry));
  auto wants = [&](Target t) {
    for (auto x : g.targets)
      if (x == t) return true;
    return false;
  };
  if ((o.has(EventKind::StoppedAfterConflict) || o.has(EventKind::ClearedRoute)) &&
      wants(Target::CrossAndStop))
    return {VerdictKind::ProgressPass, {}};
  if ((o.has(EventKind::StoppedBeforeZone) || o.has(EventKind::YieldedBeforeZone)) &&
      wants(Target::StopBeforeZone))
    return {VerdictKind::CautiousPass, {}};
  return fail("TargetNotReached");
}

// ---------------------------------------------------------------------------
// Serialization of outcomes.

inline json to_json(const SimOutcome& o) {
  json j;
  json ev = json::array();
  for (const auto& e : o.events) {
    json x;
    x["kind"] = to_string(e.kind);
    x["t"] = e.t;
    x["frame"] = e.frame;
    if (!e.detail.empty()) x["detail"] = e.detail;
    ev.push_back(x);
  }
  j["events"] = ev;
  j["scenario"] = to_json(o.scenario);
  return j;
}

}  // namespace adlab
