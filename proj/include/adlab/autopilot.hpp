#pragma once

// Autopilots as per-step transition functions with explicit per-run memory.
// The reference policy is memoryless; the fault variants each perturb one
// aspect of it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adlab/criticality.hpp"
#include "adlab/errors.hpp"
#include "adlab/kinematics.hpp"
#include "adlab/scenario.hpp"

namespace adlab {

enum class Mode { Progress, Cautious };

inline const char* to_string(Mode m) { return m == Mode::Progress ? "progress" : "cautious"; }

struct Decision {
  Mode mode = Mode::Cautious;
  double command_accel = 0.0;
};

// Piecewise-linear rate as a function of speed, clamped outside the table.
class RateTable {
 public:
  RateTable() = default;
  explicit RateTable(std::map<double, double> points) : points_(std::move(points)) {
    if (points_.empty()) throw DomainError("rate table: empty");
    for (auto [v, r] : points_)
      if (!(r > 0.0)) throw DomainError("rate table: rates must be positive");
  }

  double operator()(double v) const {
    if (points_.empty()) throw DomainError("rate table: empty");
    auto hi = points_.lower_bound(v);
    if (hi == points_.begin()) return hi->second;
    if (hi == points_.end()) return std::prev(hi)->second;
    auto lo = std::prev(hi);
    double w = (v - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }

  const std::map<double, double>& points() const { return points_; }

 private:
  std::map<double, double> points_;
};

namespace variant {

struct Reference {};

// Over-estimates the time left before the arriving vehicle by `optimism`.
struct TransitionFlawed {
  double optimism = 1.3;
};

// Rectangle in normalised boundary coordinates: u = (x_a - x_hat_a) /
// (x_tilde_a - x_hat_a), w = (x_f - x_hat_f) / x_hat_f. Inside it the ego
// commits to a stop too late and ends up standing in the zone.
struct Irrational {
  double u_lo = 0.35;
  double u_hi = 0.75;
  double w_lo = 0.3;
  double w_hi = 0.9;
  std::optional<ScenarioType> only_scenario = ScenarioType::LaneChange;

  bool contains(double x_a, double x_f, const CriticalBoundary& b) const {
    double span = b.x_tilde_a - b.x_hat_a;
    if (!(span > 0.0) || !std::isfinite(span) || !(b.x_hat_f > 0.0)) return false;
    double u = (x_a - b.x_hat_a) / span;
    double w = (x_f - b.x_hat_f) / b.x_hat_f;
    return u >= u_lo && u <= u_hi && w >= w_lo && w <= w_hi;
  }
};

// Requires margin_inflation times the nominal time and braking distance.
struct Overcautious {
  double margin_inflation = 1.5;
};

// Brakes at a rate chosen from the speed at the start of the braking
// maneuver and keeps it until the maneuver ends.
struct NonDeterminateBrake {
  RateTable rate_by_initial_speed;
};

// Same for acceleration: the rate is fixed by the speed at progress start.
struct NonDeterminateAccel {
  RateTable rate_by_initial_speed;
};

struct AlwaysCautious {};

// Progresses only if the sum over every arriving vehicle of TA / (x_j / vl)
// is at most one, so an extra vehicle far behind changes its decision.
struct CrowdSensitive {};

}  // namespace variant

using Variant = std::variant<variant::Reference, variant::TransitionFlawed, variant::Irrational,
                             variant::Overcautious, variant::NonDeterminateBrake,
                             variant::NonDeterminateAccel, variant::AlwaysCautious,
                             variant::CrowdSensitive>;

inline const char* variant_name(const Variant& v) {
  static constexpr const char* names[] = {
      "reference",           "transition_flawed",    "irrational",      "overcautious",
      "nondeterminate_brake", "nondeterminate_accel", "always_cautious", "crowd_sensitive"};
  return names[v.index()];
}

struct AutopilotSpec {
  std::string id;
  ADProfile profile = ADProfile::constant_rate(2.0, 4.0, 15.0);
  Variant variant = variant::Reference{};
  double stop_margin = 0.5;  // cautious stop distance before the zone entry
};

struct Memory {
  bool started = false;
  bool committed = false;  // latched progress
  bool irrational = false;
  bool braking = false;
  double brake_rate = 0.0;
  bool accelerating = false;
  double accel_rate = 0.0;
};

namespace detail {

inline constexpr double kTimeSlack = 1e-3;
inline constexpr double kDistSlack = 1e-2;

struct Perception {
  double dist_to_exit = 0.0;     // > 0 while the ego has not left the zone
  bool ego_in_or_past = false;   // ego at or beyond the zone entry
  double avail_time = 0.0;       // until the nearest arriving vehicle enters
  std::vector<double> arriving;  // entry distances of every vehicle not yet gone
  bool arriving_in_zone = false;
  double front = std::numeric_limits<double>::infinity();
  bool red = false;
};

inline Perception perceive(const Scene& sc, const StaticPart& s) {
  Perception p;
  p.dist_to_exit = std::max(0.0, -sc.ego.x);
  p.ego_in_or_past = sc.ego.x >= -s.zone_length();
  p.avail_time = std::numeric_limits<double>::infinity();
  for (const auto& a : sc.env.arriving_all()) {
    if (a.x < -s.zone_length()) continue;  // already through the zone
    if (a.x <= 0.0) {
      p.arriving_in_zone = true;
      p.avail_time = -std::numeric_limits<double>::infinity();
    } else {
      p.avail_time = std::min(p.avail_time, a.x / s.vl);
    }
    p.arriving.push_back(a.x);
  }
  if (auto f = sc.env.nearest_front()) p.front = *f;
  p.red = sc.env.light == Light::Red;
  return p;
}

inline double clamp_speed(const ADProfile& p, double v) {
  return std::clamp(v, 0.0, p.v_max());
}

// Largest acceleration whose next state can still stop before the front.
// The final step of a discrete stop overshoots the continuous stopping point
// by up to b dt^2 / 8, so that much is kept in reserve.
inline double greedy_accel(const ADProfile& p, double x, double v, double front, double dt,
                           double cap) {
  if (!std::isfinite(front)) return cap;
  front -= p.b_max() * dt * dt / 8.0;
  auto reach = [&](double a) {
    double v1 = clamp_speed(p, v + a * dt);
    double x1 = x + 0.5 * (v + v1) * dt;
    return x1 + p.braking_distance(v1);
  };
  if (reach(cap) <= front) return cap;
  double lo = -p.b_max();
  if (reach(lo) > front) return lo;
  double hi = cap;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (reach(mid) <= front) lo = mid;
    else hi = mid;
  }
  return lo;
}

inline double stop_command(double v, double rate, double dt) {
  if (v <= 0.0) return 0.0;
  if (v <= rate * dt) return -v / dt;
  return -rate;
}

// Progress command: full acceleration bounded by the front vehicle until the
// zone is cleared, then a constant-deceleration stop at the front vehicle.
inline double progress_command(const ADProfile& p, const Scene& sc, double front, double dt,
                               double cap) {
  double x = sc.ego.x;
  double v = sc.ego.v;
  if (x < 0.0) return greedy_accel(p, x, v, front, dt, cap);
  if (!std::isfinite(front)) return 0.0;
  double rem = front - x - p.b_max() * dt * dt / 8.0;
  if (rem <= 0.0) return stop_command(v, p.b_max(), dt);
  if (v <= 0.0) return 0.0;
  double decel = std::min(p.b_max(), v * v / (2.0 * rem));
  return stop_command(v, decel, dt);
}

inline double cautious_command(const ADProfile& p, const Scene& sc, double dt) {
  return stop_command(sc.ego.v, p.b_max(), dt);
}

inline bool nominal_progress(const ADProfile& p, const Perception& per, double v, double time_scale,
                             double margin) {
  if (per.red) return false;
  double ta = p.accel_time(per.dist_to_exit, v);
  double vf = p.accel_speed(per.dist_to_exit, v);
  return ta * margin <= per.avail_time * time_scale + kTimeSlack &&
         p.braking_distance(vf) * margin <= per.front + kDistSlack;
}

}  // namespace detail

// One transition of the autopilot at scene sc. dt is the control period.
inline std::pair<Decision, Memory> step(const AutopilotSpec& ap, const Scene& sc,
                                        const StaticPart& s, Memory mem, double dt = 0.1) {
  using namespace detail;
  const ADProfile& p = ap.profile;
  Perception per = perceive(sc, s);
  double v = std::clamp(sc.ego.v, 0.0, p.v_max());
  bool first = !mem.started;
  mem.started = true;
  Decision d;

  auto progress = [&](double cap) {
    d.mode = Mode::Progress;
    d.command_accel = progress_command(p, sc, per.front, dt, cap);
  };
  auto cautious = [&] {
    d.mode = Mode::Cautious;
    d.command_accel = cautious_command(p, sc, dt);
  };

  auto decide_latched = [&](bool go) {
    if (mem.committed || per.ego_in_or_past || go) {
      mem.committed = true;
      progress(p.a_max());
    } else {
      cautious();
    }
  };

  std::visit(
      [&](const auto& var) {
        using T = std::decay_t<decltype(var)>;
        if constexpr (std::is_same_v<T, variant::Reference>) {
          if (per.ego_in_or_past || nominal_progress(p, per, v, 1.0, 1.0)) progress(p.a_max());
          else cautious();
        } else if constexpr (std::is_same_v<T, variant::TransitionFlawed>) {
          decide_latched(nominal_progress(p, per, v, var.optimism, 1.0));
        } else if constexpr (std::is_same_v<T, variant::Overcautious>) {
          decide_latched(nominal_progress(p, per, v, 1.0, var.margin_inflation));
        } else if constexpr (std::is_same_v<T, variant::Irrational>) {
          bool applies = !var.only_scenario || *var.only_scenario == s.type;
          if (first && applies && sc.ego.x < -s.zone_length() && !per.arriving.empty() &&
              per.avail_time > 0.0) {
            CriticalBoundary b = most_critical(per.dist_to_exit, v, p, s);
            mem.irrational = var.contains(per.arriving.front(), per.front, b);
          }
          if (mem.irrational) {
            // Keep speed, then stop with the car in the middle of the zone.
            d.mode = Mode::Cautious;
            if (sc.ego.x + p.braking_distance(v) < -s.d) d.command_accel = 0.0;
            else d.command_accel = stop_command(v, p.b_max(), dt);
          } else {
            if (per.ego_in_or_past || nominal_progress(p, per, v, 1.0, 1.0)) progress(p.a_max());
            else cautious();
          }
        } else if constexpr (std::is_same_v<T, variant::NonDeterminateBrake>) {
          if (per.ego_in_or_past || nominal_progress(p, per, v, 1.0, 1.0)) progress(p.a_max());
          else cautious();
          if (d.command_accel < 0.0) {
            if (!mem.braking) {
              mem.braking = true;
              mem.brake_rate = var.rate_by_initial_speed(v);
            }
            d.command_accel = stop_command(v, mem.brake_rate, dt);
          } else {
            mem.braking = false;
          }
        } else if constexpr (std::is_same_v<T, variant::NonDeterminateAccel>) {
          bool go = mem.committed || per.ego_in_or_past || nominal_progress(p, per, v, 1.0, 1.0);
          if (go && !mem.committed) {
            mem.committed = true;
            mem.accel_rate = std::min(p.a_max(), var.rate_by_initial_speed(v));
          }
          if (go) progress(mem.accel_rate);
          else cautious();
        } else if constexpr (std::is_same_v<T, variant::AlwaysCautious>) {
          cautious();
        } else if constexpr (std::is_same_v<T, variant::CrowdSensitive>) {
          bool go = per.ego_in_or_past;
          if (!go && !per.red && !per.arriving_in_zone) {
            double ta = p.accel_time(per.dist_to_exit, v);
            double load = 0.0;
            for (double xa : per.arriving) load += ta / (xa / s.vl);
            double vf = p.accel_speed(per.dist_to_exit, v);
            go = load <= 1.0 + kTimeSlack &&
                 p.braking_distance(vf) <= per.front + kDistSlack;
          }
          if (go) progress(p.a_max());
          else cautious();
        }
      },
      ap.variant);
  return {d, mem};
}

// ---------------------------------------------------------------------------
// Catalogue of the shipped autopilots.

inline AutopilotSpec make_autopilot(const std::string& id) {
  AutopilotSpec ap;
  ap.id = id;
  if (id == "reference") {
    ap.variant = variant::Reference{};
  } else if (id == "transition_flawed") {
    ap.variant = variant::TransitionFlawed{};
  } else if (id == "irrational") {
    ap.variant = variant::Irrational{};
  } else if (id == "overcautious") {
    ap.variant = variant::Overcautious{};
  } else if (id == "nondeterminate_brake") {
    ap.profile = ADProfile::constant_rate(2.0, 5.0, 35.0);
    ap.variant = variant::NonDeterminateBrake{RateTable({{27.5, 3.0}, {30.0, 5.0}})};
  } else if (id == "nondeterminate_accel") {
    ap.variant = variant::NonDeterminateAccel{RateTable({{0.0, 2.0}, {15.0, 1.0}})};
  } else if (id == "always_cautious") {
    ap.variant = variant::AlwaysCautious{};
  } else if (id == "crowd_sensitive") {
    ap.variant = variant::CrowdSensitive{};
  } else {
    throw ConfigError("unknown autopilot '" + id + "'");
  }
  return ap;
}

inline const std::vector<std::string>& builtin_autopilots() {
  static const std::vector<std::string> ids = {
      "reference",           "transition_flawed",    "irrational",      "overcautious",
      "nondeterminate_brake", "nondeterminate_accel", "always_cautious", "crowd_sensitive"};
  return ids;
}

// A tabulated profile whose braking curves cross: from 10 m/s the vehicle
// slows down faster than from 5 m/s over the first metres.
inline ADProfile non_monotone_brake_profile() {
  std::vector<ProfileSample> t = {
      {5.0, 2.0, 4.5}, {5.0, 4.0, 3.0}, {5.0, 6.0, 0.0},
      {10.0, 2.0, 9.0}, {10.0, 4.0, 2.0}, {10.0, 5.0, 0.0},
  };
  return ADProfile::tabulated(t, 2.0, 12.0, 15.0);
}

}  // namespace adlab
