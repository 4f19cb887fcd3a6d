#pragma once

// Criticality order over test cases, most critical boundary and the zone
// decomposition of the (x_a, x_f) plane for a fixed ego initial state.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "adlab/errors.hpp"
#include "adlab/kinematics.hpp"
#include "adlab/scenario.hpp"

namespace adlab {

struct CriticalBoundary {
  double x_hat_a = 0.0;
  double x_hat_f = 0.0;
  double x_tilde_a = 0.0;  // +inf for a standing ego
  bool cautious_feasible = false;
};

// x_e is the ego distance to the zone exit, so the cautious stop has to fit
// in the x_e - 2d metres before the zone entry.
inline CriticalBoundary most_critical(double x_e, double v_e, const ADProfile& p,
                                      const StaticPart& s) {
  if (!(x_e > 0.0)) throw DomainError("most_critical: x_e must be positive");
  CriticalBoundary b;
  b.x_hat_a = p.accel_time(x_e, v_e) * s.vl;
  b.x_hat_f = p.braking_distance(p.accel_speed(x_e, v_e));
  b.x_tilde_a = v_e > 0.0 ? x_e / v_e * s.vl : std::numeric_limits<double>::infinity();
  b.cautious_feasible = p.braking_distance(v_e) <= x_e - s.zone_length();
  return b;
}

enum class Zone { CautiousOnly, SafeProgress, Irrelevant, NonNominal };

inline const char* to_string(Zone z) {
  switch (z) {
    case Zone::CautiousOnly: return "CautiousOnly";
    case Zone::SafeProgress: return "SafeProgress";
    case Zone::Irrelevant: return "Irrelevant";
    case Zone::NonNominal: return "NonNominal";
  }
  return "?";
}

inline Zone classify_zone(double x_a, double x_f, const CriticalBoundary& b) {
  if (x_a >= b.x_tilde_a) return Zone::Irrelevant;
  if (x_a >= b.x_hat_a && x_f >= b.x_hat_f) return Zone::SafeProgress;
  return b.cautious_feasible ? Zone::CautiousOnly : Zone::NonNominal;
}

inline Zone classify_zone(const TestCase& tc, const CriticalBoundary& b) {
  return classify_zone(tc.x_a, tc.x_f, b);
}

enum class Order { MoreCritical, LessCritical, Equal, Incomparable };

inline const char* to_string(Order o) {
  switch (o) {
    case Order::MoreCritical: return "MoreCritical";
    case Order::LessCritical: return "LessCritical";
    case Order::Equal: return "Equal";
    case Order::Incomparable: return "Incomparable";
  }
  return "?";
}

// Coordinatewise order on (x_a, x_f): a closer arriving vehicle and a closer
// front vehicle leave fewer safe policies.
inline Order compare_points(double x_a, double x_f, double x_a2, double x_f2) {
  if (x_a == x_a2 && x_f == x_f2) return Order::Equal;
  if (x_a <= x_a2 && x_f <= x_f2) return Order::MoreCritical;
  if (x_a >= x_a2 && x_f >= x_f2) return Order::LessCritical;
  return Order::Incomparable;
}

inline Order dominates(const TestCase& tc, const TestCase& tc2) {
  if (!(tc.static_part == tc2.static_part))
    throw DomainError("dominates: test cases have different static parts");
  if (tc.x_e != tc2.x_e || tc.v_e != tc2.v_e) return Order::Incomparable;
  return compare_points(tc.x_a, tc.x_f, tc2.x_a, tc2.x_f);
}

// Pointwise order over environment sequences of equal length: s is at least
// as critical as s2 when at every frame its arriving vehicle is nearer and
// faster and its front vehicle nearer and slower.
inline Order dominates(std::span<const EnvState> s, std::span<const EnvState> s2) {
  if (s.size() != s2.size())
    throw DomainError("dominates: sequences differ in length");
  bool le = true;  // s at least as critical as s2
  bool ge = true;  // s2 at least as critical as s
  auto cmp = [&](double a, double b) {
    if (a < b) ge = false;
    if (a > b) le = false;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s[i];
    const auto& q = s2[i];
    if (p.arriving.has_value() != q.arriving.has_value() ||
        p.front.has_value() != q.front.has_value())
      return Order::Incomparable;
    if (p.arriving) {
      cmp(p.arriving->x, q.arriving->x);
      cmp(q.arriving->v, p.arriving->v);
    }
    if (p.front) {
      cmp(p.front->x, q.front->x);
      cmp(p.front->v, q.front->v);
    }
  }
  if (le && ge) return Order::Equal;
  if (le) return Order::MoreCritical;
  if (ge) return Order::LessCritical;
  return Order::Incomparable;
}

inline double default_probe_epsilon(const StaticPart& s, double dt) { return s.vl * dt; }

// Probes on the square ring of half-width spread around (x_hat_a, x_hat_f).
// With n_probe = 8 these are the four compass offsets and the four corners.
inline std::vector<TestCase> boundary_probe(double x_e, double v_e, const ADProfile& p,
                                            const StaticPart& s, int n_probe, double spread) {
  if (n_probe < 1) throw DomainError("boundary_probe: n_probe must be >= 1");
  if (!(spread > 0.0)) throw DomainError("boundary_probe: spread must be positive");
  CriticalBoundary b = most_critical(x_e, v_e, p, s);
  std::vector<TestCase> out;
  for (int k = 0; k < n_probe; ++k) {
    double th = 2.0 * std::numbers::pi * k / n_probe;
    double c = std::cos(th);
    double sn = std::sin(th);
    double m = std::max(std::abs(c), std::abs(sn));
    double dx = std::abs(c / m) < 1e-12 ? 0.0 : c / m;
    double dy = std::abs(sn / m) < 1e-12 ? 0.0 : sn / m;
    TestCase tc;
    tc.static_part = s;
    tc.x_e = x_e;
    tc.v_e = v_e;
    tc.x_a = b.x_hat_a + spread * dx;
    tc.x_f = b.x_hat_f + spread * dy;
    if (tc.x_a <= 0.0 || tc.x_f <= 0.0) continue;
    if (classify_zone(tc, b) == Zone::NonNominal) continue;
    out.push_back(tc);
  }
  return out;
}

}  // namespace adlab
