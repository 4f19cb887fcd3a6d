#pragma once

// Acceleration/deceleration (A/D) function algebra of an ego vehicle.
//
//   B(v)      braking distance from speed v to standstill
//   VB(v, x)  speed reached from v after braking over distance x
//   TA(x, v)  time needed to travel x from speed v accelerating at full rate
//   VA(x, v)  speed reached after travelling x from speed v at full rate
//
// Constant-rate profiles use closed forms (bang-bang acceleration capped at
// v_max). Tabulated profiles hold per-initial-speed curves and interpolate
// linearly in squared speed, i.e. piecewise-constant acceleration between
// samples, so a table sampled from a constant-rate profile reproduces it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "adlab/errors.hpp"

namespace adlab {

enum class ProfileKind { ConstantRate, Tabulated };

// One tabulated observation: from initial speed v, after distance x, the
// vehicle moves at v_prime. Rows with v_prime < v describe braking, rows with
// v_prime > v (or cruising at v > 0) describe acceleration.
struct ProfileSample {
  double v = 0.0;
  double x = 0.0;
  double v_prime = 0.0;
};

namespace detail {

inline constexpr double kSpeedSlack = 1e-9;

struct SpeedCurve {
  double v0 = 0.0;
  std::vector<double> x;  // ascending, x.front() == 0
  std::vector<double> v;  // speed after x
};

inline double sq(double a) { return a * a; }

// Speed on the curve at distance x, assuming x <= x.back().
inline double curve_speed(const SpeedCurve& c, double x) {
  if (x <= 0.0) return c.v.front();
  if (x >= c.x.back()) return c.v.back();
  auto it = std::upper_bound(c.x.begin(), c.x.end(), x);
  std::size_t k = static_cast<std::size_t>(it - c.x.begin()) - 1;
  double r = (x - c.x[k]) / (c.x[k + 1] - c.x[k]);
  double v2 = sq(c.v[k]) + r * (sq(c.v[k + 1]) - sq(c.v[k]));
  return std::sqrt(std::max(0.0, v2));
}

inline double const_braking_speed(double b, double v, double x) {
  return std::sqrt(std::max(0.0, v * v - 2.0 * b * x));
}

inline double const_accel_speed(double a, double vmax, double x, double v) {
  return std::min(vmax, std::sqrt(v * v + 2.0 * a * x));
}

inline double const_accel_time(double a, double vmax, double x, double v) {
  if (x <= 0.0) return 0.0;
  double cap_distance = (vmax * vmax - v * v) / (2.0 * a);
  if (x <= cap_distance) {
    // 2x / (v + sqrt(v^2 + 2ax)) avoids cancellation for small x.
    return 2.0 * x / (v + std::sqrt(v * v + 2.0 * a * x));
  }
  return (vmax - v) / a + (x - cap_distance) / vmax;
}

}  // namespace detail

class ADProfile {
 public:
  static ADProfile constant_rate(double a_max, double b_max, double v_max) {
    check_rates(a_max, b_max, v_max);
    ADProfile p;
    p.kind_ = ProfileKind::ConstantRate;
    p.a_max_ = a_max;
    p.b_max_ = b_max;
    p.v_max_ = v_max;
    return p;
  }

  // a_max/b_max drive the extrapolation tails beyond the table and bound the
  // commands the simulator accepts; v_max caps every speed in the table.
  static ADProfile tabulated(std::vector<ProfileSample> table, double a_max,
                             double b_max, double v_max) {
    check_rates(a_max, b_max, v_max);
    ADProfile p;
    p.kind_ = ProfileKind::Tabulated;
    p.a_max_ = a_max;
    p.b_max_ = b_max;
    p.v_max_ = v_max;
    std::sort(table.begin(), table.end(), [](const auto& l, const auto& r) {
      return l.v != r.v ? l.v < r.v : l.x < r.x;
    });
    p.build_curves(table);
    p.table_ = std::move(table);
    return p;
  }

  ProfileKind kind() const { return kind_; }
  double a_max() const { return a_max_; }
  double b_max() const { return b_max_; }
  double v_max() const { return v_max_; }
  const std::vector<ProfileSample>& table() const { return table_; }

  double braking_distance(double v) const {
    check_speed(v);
    if (kind_ == ProfileKind::ConstantRate) return v * v / (2.0 * b_max_);
    return tab_braking_distance(v);
  }

  double braking_speed(double v, double x) const {
    check_speed(v);
    check_distance(x);
    if (kind_ == ProfileKind::ConstantRate)
      return detail::const_braking_speed(b_max_, v, x);
    return tab_braking_speed(v, x);
  }

  double accel_time(double x, double v) const {
    check_distance(x);
    check_speed(v);
    if (kind_ == ProfileKind::ConstantRate)
      return detail::const_accel_time(a_max_, v_max_, x, v);
    return tab_accel(x, v).time;
  }

  double accel_speed(double x, double v) const {
    check_distance(x);
    check_speed(v);
    if (kind_ == ProfileKind::ConstantRate)
      return detail::const_accel_speed(a_max_, v_max_, x, std::min(v, v_max_));
    return tab_accel(x, v).speed;
  }

  // True when a tabulated evaluation at (v, x) leaves the sampled range and
  // falls back to a constant-rate tail. Always false for closed forms.
  bool braking_extrapolated(double v, double x) const {
    if (kind_ == ProfileKind::ConstantRate) return false;
    const auto& top = braking_.back();
    if (v > top.v0) return true;
    auto [lo, hi] = bracket(braking_, v);
    if (x > braking_[lo].x.back() && braking_[lo].v.back() > 0.0) return true;
    return hi != lo && x > braking_[hi].x.back() && braking_[hi].v.back() > 0.0;
  }

  bool accel_extrapolated(double x, double v) const {
    if (kind_ == ProfileKind::ConstantRate) return false;
    if (accel_.empty()) return true;
    if (v < accel_.front().v0 || v > accel_.back().v0) return true;
    auto [lo, hi] = bracket(accel_, v);
    return x > accel_[lo].x.back() || x > accel_[hi].x.back();
  }

 private:
  struct AccelEval {
    double speed;
    double time;
  };

  ADProfile() = default;

  static void check_rates(double a, double b, double vmax) {
    if (!(a > 0.0) || !(b > 0.0) || !(vmax > 0.0) || !std::isfinite(a) ||
        !std::isfinite(b) || !std::isfinite(vmax))
      throw DomainError("ADProfile: a_max, b_max and v_max must be positive");
  }

  void check_speed(double v) const {
    if (!(v >= -detail::kSpeedSlack && v <= v_max_ + detail::kSpeedSlack))
      throw DomainError("speed " + std::to_string(v) + " outside [0, " +
                        std::to_string(v_max_) + "]");
  }

  static void check_distance(double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw DomainError("distance must be finite and non-negative, got " +
                        std::to_string(x));
  }

  // Rows are grouped by initial speed and direction, so one speed may start
  // both a braking and an acceleration curve. A cruising row (v_prime == v,
  // x > 0) belongs to the acceleration side.
  void build_curves(const std::vector<ProfileSample>& table) {
    std::map<std::pair<double, bool>, std::vector<ProfileSample>> groups;
    for (const auto& s : table) {
      if (!(s.v >= 0.0 && s.v <= v_max_ + detail::kSpeedSlack &&
            s.v_prime >= 0.0 && s.v_prime <= v_max_ + detail::kSpeedSlack &&
            s.x >= 0.0))
        throw DomainError("profile table sample outside [0, v_max] / x < 0");
      if (s.x == 0.0) {
        if (s.v_prime != s.v)
          throw DomainError("profile table: speed must equal v at x = 0");
        continue;
      }
      if (s.v == 0.0 && s.v_prime == 0.0)
        throw DomainError("profile table: standing vehicle cannot cover distance");
      groups[{s.v, s.v_prime < s.v}].push_back(s);
    }
    for (auto& [key, rows] : groups) {
      auto [v0, braking] = key;
      detail::SpeedCurve c;
      c.v0 = v0;
      c.x.push_back(0.0);
      c.v.push_back(v0);
      for (const auto& r : rows) {
        if (r.x == c.x.back()) continue;
        c.x.push_back(r.x);
        c.v.push_back(r.v_prime);
      }
      for (std::size_t i = 1; i < c.v.size(); ++i) {
        if (braking ? c.v[i] > c.v[i - 1] : c.v[i] < c.v[i - 1])
          throw DomainError("profile table: non-monotone curve from v = " +
                            std::to_string(v0));
      }
      (braking ? braking_ : accel_).push_back(std::move(c));
    }
    if (braking_.empty() || braking_.front().v0 != 0.0) {
      detail::SpeedCurve rest;
      rest.x = {0.0};
      rest.v = {0.0};
      braking_.insert(braking_.begin(), std::move(rest));
    }
  }

  // Indices of the curves whose initial speeds bracket v (lo == hi on an
  // exact match or when v lies outside the sampled speed range).
  static std::pair<std::size_t, std::size_t> bracket(
      const std::vector<detail::SpeedCurve>& curves, double v) {
    auto it = std::lower_bound(
        curves.begin(), curves.end(), v,
        [](const detail::SpeedCurve& c, double s) { return c.v0 < s; });
    if (it == curves.end()) return {curves.size() - 1, curves.size() - 1};
    std::size_t hi = static_cast<std::size_t>(it - curves.begin());
    if (it->v0 == v || hi == 0) return {hi, hi};
    return {hi - 1, hi};
  }

  double curve_stop_distance(const detail::SpeedCurve& c) const {
    for (std::size_t i = 0; i < c.v.size(); ++i)
      if (c.v[i] == 0.0) return c.x[i];
    return c.x.back() + c.v.back() * c.v.back() / (2.0 * b_max_);
  }

  double curve_braking_speed(const detail::SpeedCurve& c, double x) const {
    if (x <= c.x.back()) return detail::curve_speed(c, x);
    return detail::const_braking_speed(b_max_, c.v.back(), x - c.x.back());
  }

  double tab_braking_distance(double v) const {
    const auto& top = braking_.back();
    if (v > top.v0) {
      return (v * v - top.v0 * top.v0) / (2.0 * b_max_) +
             curve_stop_distance(top);
    }
    auto [lo, hi] = bracket(braking_, v);
    if (lo == hi) return curve_stop_distance(braking_[lo]);
    double w = (v - braking_[lo].v0) / (braking_[hi].v0 - braking_[lo].v0);
    return (1.0 - w) * curve_stop_distance(braking_[lo]) +
           w * curve_stop_distance(braking_[hi]);
  }

  // Between two curves the distance axis is normalised by each curve's stop
  // distance, so VB(v, 0) = v and VB(v, B(v)) = 0 hold for every v.
  double tab_braking_speed(double v, double x) const {
    const auto& top = braking_.back();
    if (v > top.v0) {
      double s = (v * v - top.v0 * top.v0) / (2.0 * b_max_);
      if (x < s) return detail::const_braking_speed(b_max_, v, x);
      return curve_braking_speed(top, x - s);
    }
    auto [lo, hi] = bracket(braking_, v);
    if (lo == hi) return curve_braking_speed(braking_[lo], x);
    const auto& cl = braking_[lo];
    const auto& ch = braking_[hi];
    double w = (v - cl.v0) / (ch.v0 - cl.v0);
    double bl = curve_stop_distance(cl);
    double bh = curve_stop_distance(ch);
    double bv = (1.0 - w) * bl + w * bh;
    if (bv <= 0.0 || x >= bv) return 0.0;
    return (1.0 - w) * curve_braking_speed(cl, x * bl / bv) +
           w * curve_braking_speed(ch, x * bh / bv);
  }

  AccelEval curve_accel(const detail::SpeedCurve& c, double x) const {
    double t = 0.0;
    std::size_t k = 0;
    while (k + 1 < c.x.size() && c.x[k + 1] <= x) {
      double denom = c.v[k] + c.v[k + 1];
      if (denom <= 0.0)
        throw DomainError("profile table: acceleration curve never moves");
      t += 2.0 * (c.x[k + 1] - c.x[k]) / denom;
      ++k;
    }
    if (k + 1 < c.x.size()) {
      double v = detail::curve_speed(c, x);
      double denom = c.v[k] + v;
      if (x > c.x[k]) {
        if (denom <= 0.0)
          throw DomainError("profile table: acceleration curve never moves");
        t += 2.0 * (x - c.x[k]) / denom;
      }
      return {v, t};
    }
    double rest = x - c.x.back();
    double vl = std::min(c.v.back(), v_max_);
    return {detail::const_accel_speed(a_max_, v_max_, rest, vl),
            t + detail::const_accel_time(a_max_, v_max_, rest, vl)};
  }

  AccelEval tab_accel(double x, double v) const {
    v = std::min(v, v_max_);
    if (accel_.empty() || v > accel_.back().v0) {
      if (v == 0.0 && x > 0.0 && a_max_ <= 0.0)
        throw DomainError("TA: standstill with zero acceleration");
      return {detail::const_accel_speed(a_max_, v_max_, x, v),
              detail::const_accel_time(a_max_, v_max_, x, v)};
    }
    const auto& low = accel_.front();
    if (v < low.v0) {
      double s = (low.v0 * low.v0 - v * v) / (2.0 * a_max_);
      if (x <= s)
        return {detail::const_accel_speed(a_max_, v_max_, x, v),
                detail::const_accel_time(a_max_, v_max_, x, v)};
      AccelEval tail = curve_accel(low, x - s);
      return {tail.speed, (low.v0 - v) / a_max_ + tail.time};
    }
    auto [lo, hi] = bracket(accel_, v);
    if (lo == hi) return curve_accel(accel_[lo], x);
    double w = (v - accel_[lo].v0) / (accel_[hi].v0 - accel_[lo].v0);
    AccelEval el = curve_accel(accel_[lo], x);
    AccelEval eh = curve_accel(accel_[hi], x);
    return {(1.0 - w) * el.speed + w * eh.speed,
            (1.0 - w) * el.time + w * eh.time};
  }

  ProfileKind kind_ = ProfileKind::ConstantRate;
  double a_max_ = 0.0;
  double b_max_ = 0.0;
  double v_max_ = 0.0;
  std::vector<ProfileSample> table_;
  std::vector<detail::SpeedCurve> braking_;
  std::vector<detail::SpeedCurve> accel_;
};

// Free-function spellings of the four A/D functions.
inline double braking_distance(const ADProfile& p, double v) {
  return p.braking_distance(v);
}
inline double braking_speed(const ADProfile& p, double v, double x) {
  return p.braking_speed(v, x);
}
inline double accel_time(const ADProfile& p, double x, double v) {
  return p.accel_time(x, v);
}
inline double accel_speed(const ADProfile& p, double x, double v) {
  return p.accel_speed(x, v);
}

// ---------------------------------------------------------------------------
// Profile estimation from recorded traces.

enum class TraceKind { Braking, Acceleration };

struct TraceSample {
  double t = 0.0;
  double x = 0.0;  // travelled distance
  double v = 0.0;
};

struct Trace {
  TraceKind kind = TraceKind::Braking;
  std::vector<TraceSample> samples;
};

struct EstimateOptions {
  // Rates used for the extrapolation tails when no trace of that kind exists.
  std::optional<double> fallback_a_max;
  std::optional<double> fallback_b_max;
};

// Every sample of a trace starts a curve made of the trace suffix, so the
// estimate reproduces the traces at sample points exactly.
inline ADProfile estimate_profile(std::span<const Trace> traces,
                                  const EstimateOptions& opts = {}) {
  if (traces.empty()) throw DomainError("estimate_profile: no traces");
  std::vector<ProfileSample> table;
  std::map<double, bool> seen_braking;
  std::map<double, bool> seen_accel;
  double a_max = 0.0;
  double b_max = 0.0;
  double v_max = 0.0;
  for (const auto& tr : traces) {
    const auto& s = tr.samples;
    if (s.size() < 2) throw DomainError("estimate_profile: trace too short");
    bool braking = tr.kind == TraceKind::Braking;
    for (std::size_t i = 1; i < s.size(); ++i) {
      bool bad_speed = braking ? s[i].v > s[i - 1].v : s[i].v < s[i - 1].v;
      if (bad_speed || s[i].x < s[i - 1].x || s[i].t <= s[i - 1].t)
        throw DomainError(std::string("estimate_profile: rejected ") +
                          (braking ? "braking" : "acceleration") +
                          " trace, non-monotone at sample " +
                          std::to_string(i));
      double dx = s[i].x - s[i - 1].x;
      if (dx > 0.0) {
        double rate = std::abs(detail::sq(s[i].v) - detail::sq(s[i - 1].v)) /
                      (2.0 * dx);
        (braking ? b_max : a_max) = std::max(braking ? b_max : a_max, rate);
      }
    }
    for (const auto& smp : s) v_max = std::max(v_max, smp.v);
    auto& seen = braking ? seen_braking : seen_accel;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double v0 = s[i].v;
      if (seen.count(v0)) continue;
      // A zero-speed acceleration curve keyed at 0 would collide with the
      // standstill braking curve; keep it only on acceleration traces.
      if (!braking && v0 == 0.0 && seen_braking.count(0.0)) continue;
      seen[v0] = true;
      for (std::size_t k = i; k < s.size(); ++k) {
        double dx = s[k].x - s[i].x;
        if (k > i && dx == 0.0) continue;
        table.push_back({v0, dx, s[k].v});
      }
    }
  }
  if (a_max <= 0.0) {
    if (!opts.fallback_a_max)
      throw DomainError("estimate_profile: no acceleration trace and no "
                        "fallback acceleration rate");
    a_max = *opts.fallback_a_max;
  }
  if (b_max <= 0.0) {
    if (!opts.fallback_b_max)
      throw DomainError("estimate_profile: no braking trace and no fallback "
                        "braking rate");
    b_max = *opts.fallback_b_max;
  }
  return ADProfile::tabulated(std::move(table), a_max, b_max, v_max);
}

// Records a braking or acceleration trace of a profile at time step dt by
// integrating the closed-form speed along distance. Useful for round trips.
inline Trace record_trace(const ADProfile& p, TraceKind kind, double v0,
                          double dt, double duration) {
  Trace tr;
  tr.kind = kind;
  double t = 0.0;
  double x = 0.0;
  double v = v0;
  tr.samples.push_back({t, x, v});
  while (t + 1e-12 < duration) {
    double v1;
    if (kind == TraceKind::Braking) {
      v1 = std::max(0.0, v - p.b_max() * dt);
    } else {
      v1 = std::min(p.v_max(), v + p.a_max() * dt);
    }
    double a = (v1 - v) / dt;
    x += a == 0.0 ? v * dt : (v1 * v1 - v * v) / (2.0 * a);
    v = v1;
    t += dt;
    tr.samples.push_back({t, x, v});
    if (kind == TraceKind::Braking && v == 0.0) break;
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Monotonicity of the A/D functions in the initial speed.

enum class ADFunction { VB, TA, VA };

inline const char* to_string(ADFunction f) {
  switch (f) {
    case ADFunction::VB: return "VB";
    case ADFunction::TA: return "TA";
    case ADFunction::VA: return "VA";
  }
  return "?";
}

struct MonotonicityViolation {
  ADFunction function;
  double v_low;   // the smaller speed of the compared pair
  double v_high;  // the larger speed
  double x;
  double value_low;
  double value_high;
};

struct MonotonicityReport {
  std::vector<MonotonicityViolation> violations;
  std::size_t samples = 0;
  std::size_t extrapolated = 0;  // samples answered by extrapolation tails
  bool monotone() const { return violations.empty(); }
};

// Samples v on [0, v_max] and x on [0, x_max] (default B(v_max)) and checks
// adjacent speed pairs: VB and VA non-decreasing in v, TA non-increasing.
inline MonotonicityReport check_monotonicity(
    const ADProfile& p, double speed_step, double distance_step,
    std::optional<double> x_max = std::nullopt) {
  if (!(speed_step > 0.0) || !(distance_step > 0.0))
    throw DomainError("check_monotonicity: grid steps must be positive");
  constexpr double kTol = 1e-9;
  double xm = x_max.value_or(p.braking_distance(p.v_max()));
  std::vector<double> speeds;
  for (int i = 0;; ++i) {
    double v = i * speed_step;
    if (v > p.v_max() + 1e-12) break;
    speeds.push_back(std::min(v, p.v_max()));
  }
  std::vector<double> dists;
  for (int j = 0;; ++j) {
    double x = j * distance_step;
    if (x > xm + 1e-12) break;
    dists.push_back(x);
  }
  MonotonicityReport rep;
  for (double x : dists) {
    for (std::size_t i = 0; i < speeds.size(); ++i) {
      double v = speeds[i];
      ++rep.samples;
      if (p.braking_extrapolated(v, x) || p.accel_extrapolated(x, v))
        ++rep.extrapolated;
      if (i == 0) continue;
      double u = speeds[i - 1];
      double vb_lo = p.braking_speed(u, x);
      double vb_hi = p.braking_speed(v, x);
      if (vb_hi < vb_lo - kTol)
        rep.violations.push_back({ADFunction::VB, u, v, x, vb_lo, vb_hi});
      double ta_lo = p.accel_time(x, u);
      double ta_hi = p.accel_time(x, v);
      if (ta_hi > ta_lo + kTol)
        rep.violations.push_back({ADFunction::TA, u, v, x, ta_lo, ta_hi});
      double va_lo = p.accel_speed(x, u);
      double va_hi = p.accel_speed(x, v);
      if (va_lo > va_hi + kTol)
        rep.violations.push_back({ADFunction::VA, u, v, x, va_lo, va_hi});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// CSV persistence: header `v,x,v_prime`, six decimals.

inline void save_profile_csv(const ADProfile& p, std::ostream& out) {
  if (p.kind() != ProfileKind::Tabulated)
    throw DomainError("save_profile_csv: only tabulated profiles persist");
  out << "v,x,v_prime\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& s : p.table())
    out << s.v << ',' << s.x << ',' << s.v_prime << '\n';
}

// Rates not supplied are inferred from the steepest sampled segment; v_max
// defaults to the largest speed in the table.
inline ADProfile load_profile_csv(std::istream& in,
                                  std::optional<double> a_max = std::nullopt,
                                  std::optional<double> b_max = std::nullopt,
                                  std::optional<double> v_max = std::nullopt) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("profile CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "v,x,v_prime")
    throw ConfigError("profile CSV: expected header 'v,x,v_prime'");
  std::vector<ProfileSample> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    ProfileSample s;
    char c1 = 0;
    char c2 = 0;
    if (!(ss >> s.v >> c1 >> s.x >> c2 >> s.v_prime) || c1 != ',' || c2 != ',')
      throw ConfigError("profile CSV: malformed row " + std::to_string(lineno));
    rows.push_back(s);
  }
  if (rows.empty()) throw ConfigError("profile CSV: no samples");
  double vm = 0.0;
  double am = 0.0;
  double bm = 0.0;
  std::map<double, std::vector<ProfileSample>> groups;
  for (const auto& r : rows) {
    vm = std::max({vm, r.v, r.v_prime});
    groups[r.v].push_back(r);
  }
  for (auto& [v0, g] : groups) {
    std::sort(g.begin(), g.end(),
              [](const auto& l, const auto& r) { return l.x < r.x; });
    double px = 0.0;
    double pv = v0;
    for (const auto& r : g) {
      if (r.x > px) {
        double rate = (detail::sq(r.v_prime) - detail::sq(pv)) / (2.0 * (r.x - px));
        if (rate > 0.0) am = std::max(am, rate);
        if (rate < 0.0) bm = std::max(bm, -rate);
      }
      px = r.x;
      pv = r.v_prime;
    }
  }
  return ADProfile::tabulated(std::move(rows), a_max.value_or(am > 0 ? am : 1.0),
                              b_max.value_or(bm > 0 ? bm : 1.0),
                              v_max.value_or(vm));
}

}  // namespace adlab
