#pragma once

// Speed partitions: one conservative test per speed interval, and the ratio
// of the exact safe region those rectangles cover.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <vector>

#include "adlab/criticality.hpp"
#include "adlab/errors.hpp"
#include "adlab/kinematics.hpp"
#include "adlab/scenario.hpp"

namespace adlab {

struct Corner {
  double x_a = 0.0;  // x_hat_a at the interval's lower speed
  double x_f = 0.0;  // x_hat_f at the interval's upper speed
};

struct SpeedPartition {
  double x_e = 0.0;
  std::vector<double> speeds;  // strictly decreasing
  std::vector<Corner> corners;  // corners[i] covers [speeds[i+1], speeds[i]]
  ADProfile profile = ADProfile::constant_rate(1.0, 1.0, 1.0);
  StaticPart static_part;
};

inline SpeedPartition build_partition(double x_e, std::vector<double> speeds, const ADProfile& p,
                                      const StaticPart& s) {
  if (speeds.size() < 2) throw DomainError("build_partition: need at least two speeds");
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (speeds[i] < 0.0 || speeds[i] > p.v_max())
      throw DomainError("build_partition: speed outside [0, v_max]");
    if (i > 0 && !(speeds[i] < speeds[i - 1]))
      throw DomainError("build_partition: speeds must be strictly decreasing");
  }
  SpeedPartition part;
  part.x_e = x_e;
  part.profile = p;
  part.static_part = s;
  for (std::size_t i = 0; i + 1 < speeds.size(); ++i) {
    CriticalBoundary lo = most_critical(x_e, speeds[i + 1], p, s);
    CriticalBoundary hi = most_critical(x_e, speeds[i], p, s);
    part.corners.push_back({lo.x_hat_a, hi.x_hat_f});
  }
  part.speeds = std::move(speeds);
  return part;
}

// Interval index containing v (lowest index on shared endpoints).
inline std::size_t interval_of(const SpeedPartition& part, double v) {
  for (std::size_t i = 0; i + 1 < part.speeds.size(); ++i)
    if (v >= part.speeds[i + 1] && v <= part.speeds[i]) return i;
  throw DomainError("interval_of: speed outside the partition");
}

struct CoverageResult {
  double covered_volume = 0.0;
  double safe_volume = 0.0;
  double ratio = 0.0;
  int steps = 0;
  double h_v = 0.0;
  double h_f = 0.0;
  double x_f_cap = 0.0;
};

inline double default_x_f_cap(const SpeedPartition& part) {
  return 2.0 * part.profile.braking_distance(part.profile.v_max());
}

// Midpoint rule over v in [v_n, v_0], x_a in [0, x_tilde_a(v)], x_f in
// [0, cap]. Both regions are products in (x_a, x_f) for fixed v, so each
// speed slice reduces to two one-dimensional counts.
inline CoverageResult coverage_ratio(const SpeedPartition& part,
                                     std::optional<double> x_f_cap = std::nullopt,
                                     int steps = 200) {
  if (steps < 1) throw DomainError("coverage_ratio: steps must be positive");
  if (part.speeds.back() <= 0.0)
    throw DomainError("coverage_ratio: lowest speed must be positive (x_tilde_a unbounded)");
  double cap = x_f_cap.value_or(default_x_f_cap(part));
  for (const auto& c : part.corners)
    if (cap < c.x_f)
      throw DomainError("coverage_ratio: x_f cap " + std::to_string(cap) +
                        " below corner x_hat_f " + std::to_string(c.x_f));
  const double v_lo = part.speeds.back();
  const double v_hi = part.speeds.front();
  CoverageResult r;
  r.steps = steps;
  r.h_v = (v_hi - v_lo) / steps;
  r.h_f = cap / steps;
  r.x_f_cap = cap;
  auto count_ge = [&](double h, double thr) {
    // midpoints (k + 0.5) h, k = 0..steps-1, that are >= thr
    if (thr <= 0.5 * h) return steps;
    double k = std::ceil(thr / h - 0.5);
    return std::max(0, steps - static_cast<int>(k));
  };
  for (int iv = 0; iv < steps; ++iv) {
    double v = v_lo + (iv + 0.5) * r.h_v;
    CriticalBoundary b = most_critical(part.x_e, v, part.profile, part.static_part);
    double h_a = b.x_tilde_a / steps;
    const Corner& c = part.corners[interval_of(part, v)];
    double safe = count_ge(h_a, b.x_hat_a) * h_a * count_ge(r.h_f, b.x_hat_f) * r.h_f;
    double cov = count_ge(h_a, c.x_a) * h_a * count_ge(r.h_f, c.x_f) * r.h_f;
    r.safe_volume += safe * r.h_v;
    r.covered_volume += cov * r.h_v;
  }
  r.ratio = r.safe_volume > 0.0 ? r.covered_volume / r.safe_volume : 0.0;
  return r;
}

// Exact-safe and covered membership of a single point of the test space.
inline bool exact_safe(const SpeedPartition& part, double v, double x_a, double x_f) {
  CriticalBoundary b = most_critical(part.x_e, v, part.profile, part.static_part);
  return x_a >= b.x_hat_a && x_a <= b.x_tilde_a && x_f >= b.x_hat_f;
}

inline bool covered(const SpeedPartition& part, double v, double x_a, double x_f) {
  CriticalBoundary b = most_critical(part.x_e, v, part.profile, part.static_part);
  const Corner& c = part.corners[interval_of(part, v)];
  return x_a >= c.x_a && x_a <= b.x_tilde_a && x_f >= c.x_f;
}

// Envelope against staircase, one row per sampled speed.
inline void write_envelope_csv(const SpeedPartition& part, std::ostream& out, int samples = 100) {
  out << "v,x_hat_a,x_hat_f,corner_x_a,corner_x_f\n";
  const double v_lo = part.speeds.back();
  const double v_hi = part.speeds.front();
  char buf[160];
  for (int k = 0; k <= samples; ++k) {
    double v = v_lo + (v_hi - v_lo) * k / samples;
    CriticalBoundary b = most_critical(part.x_e, v, part.profile, part.static_part);
    const Corner& c = part.corners[interval_of(part, v)];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f\n", v, b.x_hat_a, b.x_hat_f, c.x_a,
                  c.x_f);
    out << buf;
  }
}

inline json to_json(const CoverageResult& r) {
  json j;
  j["covered_volume"] = r.covered_volume;
  j["safe_volume"] = r.safe_volume;
  j["ratio"] = r.ratio;
  j["steps"] = r.steps;
  j["h_v"] = r.h_v;
  j["h_f"] = r.h_f;
  j["x_f_cap"] = r.x_f_cap;
  return j;
}

inline json to_json(const SpeedPartition& p) {
  json j;
  j["x_e"] = p.x_e;
  j["speeds"] = p.speeds;
  json cs = json::array();
  for (const auto& c : p.corners) cs.push_back({{"x_a", c.x_a}, {"x_f", c.x_f}});
  j["corners"] = cs;
  return j;
}

}  // namespace adlab
