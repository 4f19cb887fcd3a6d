#pragma once

// Scenes, scenarios, test cases and goals of the elementary adverse
// scenarios, plus NPC-trajectory expansion of compact test cases.
//
// Route coordinates. Every vehicle lives on a 1-D route. The critical zone
// occupies [-2d, 0] on both the ego route and the arriving route:
//   ego       x < -2d before the zone, x > 0 once it has left the zone;
//   arriving  x is its distance to the zone entry, decreasing at vl; it is
//             inside the zone while -2d <= x <= 0 and gone once x < -2d;
//   front     x is its distance beyond the ego's zone exit.
// A compact test case (x_e, v_e, x_a, x_f) therefore starts the ego at -x_e,
// the arriving vehicle at x_a and the front vehicle at x_f.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "adlab/errors.hpp"

namespace adlab {

enum class ScenarioType { MergeYield, LaneChange, IntersectionYield, IntersectionLight };

inline constexpr ScenarioType kAllScenarioTypes[] = {
    ScenarioType::MergeYield, ScenarioType::LaneChange,
    ScenarioType::IntersectionYield, ScenarioType::IntersectionLight};

inline const char* to_string(ScenarioType t) {
  switch (t) {
    case ScenarioType::MergeYield: return "merge_yield";
    case ScenarioType::LaneChange: return "lane_change";
    case ScenarioType::IntersectionYield: return "intersection_yield";
    case ScenarioType::IntersectionLight: return "intersection_light";
  }
  return "?";
}

inline ScenarioType scenario_type_from_string(const std::string& s) {
  for (auto t : kAllScenarioTypes)
    if (s == to_string(t)) return t;
  throw ConfigError("unknown scenario type '" + s + "'");
}

// Row label used by the Table-2 style report.
inline const char* display_name(ScenarioType t) {
  switch (t) {
    case ScenarioType::MergeYield: return "Merge with a yield sign";
    case ScenarioType::LaneChange: return "Lane Change";
    case ScenarioType::IntersectionYield: return "Intersection with yield signs";
    case ScenarioType::IntersectionLight: return "Intersection with traffic lights";
  }
  return "?";
}

enum class Light { Green, Red };

inline const char* to_string(Light l) { return l == Light::Green ? "green" : "red"; }

struct LightSchedule {
  double green_s = 60.0;
  double red_s = 30.0;
  double offset_s = 0.0;  // time already spent in the cycle at t = 0

  Light at(double t) const {
    double cycle = green_s + red_s;
    double phase = std::fmod(t + offset_s, cycle);
    if (phase < 0.0) phase += cycle;
    return phase < green_s ? Light::Green : Light::Red;
  }
};

struct StaticPart {
  ScenarioType type = ScenarioType::IntersectionYield;
  double d = 5.0;    // zone half-length
  double vl = 10.0;  // arriving-road speed limit
  std::optional<LightSchedule> light;

  static StaticPart make(ScenarioType t, double d = 5.0, double vl = 10.0) {
    StaticPart s;
    s.type = t;
    s.d = d;
    s.vl = vl;
    if (t == ScenarioType::IntersectionLight) s.light = LightSchedule{};
    s.validate();
    return s;
  }

  double zone_length() const { return 2.0 * d; }

  void validate() const {
    if (!(d > 0.0) || !(vl > 0.0))
      throw DomainError("static part: d and vl must be positive");
    if (light && (!(light->green_s > 0.0) || !(light->red_s > 0.0)))
      throw DomainError("static part: light phases must be positive");
  }

  bool operator==(const StaticPart& o) const {
    bool same_light = light.has_value() == o.light.has_value() &&
                      (!light || (light->green_s == o.light->green_s &&
                                  light->red_s == o.light->red_s &&
                                  light->offset_s == o.light->offset_s));
    return type == o.type && d == o.d && vl == o.vl && same_light;
  }
};

struct EgoState {
  double x = 0.0;
  double v = 0.0;
  bool operator==(const EgoState&) const = default;
};

struct VehicleState {
  double x = 0.0;
  double v = 0.0;
  bool operator==(const VehicleState&) const = default;
};

enum class Lane { Arriving, Front };

inline const char* to_string(Lane l) { return l == Lane::Arriving ? "arriving" : "front"; }

struct ExtraVehicle {
  Lane lane = Lane::Arriving;
  double x = 0.0;
  double v = 0.0;
  bool operator==(const ExtraVehicle&) const = default;
};

struct EnvState {
  std::optional<VehicleState> arriving;
  std::optional<VehicleState> front;
  std::vector<ExtraVehicle> extras;
  std::optional<Light> light;
  bool operator==(const EnvState&) const = default;

  // Every vehicle on the arriving road, primary first.
  std::vector<VehicleState> arriving_all() const {
    std::vector<VehicleState> out;
    if (arriving) out.push_back(*arriving);
    for (const auto& e : extras)
      if (e.lane == Lane::Arriving) out.push_back({e.x, e.v});
    return out;
  }

  // Closest obstacle ahead of the ego on its own route, if any.
  std::optional<double> nearest_front() const {
    std::optional<double> best;
    if (front) best = front->x;
    for (const auto& e : extras)
      if (e.lane == Lane::Front && (!best || e.x < *best)) best = e.x;
    return best;
  }
};

struct Scene {
  double t = 0.0;
  EgoState ego;
  EnvState env;
};

struct Scenario {
  StaticPart static_part;
  double dt = 0.1;
  std::vector<Scene> frames;
};

// Extra vehicle added by an equivalence mutation. position is in the lane's
// own coordinate at t = 0 (distance to zone entry, or beyond ego zone exit).
struct Mutation {
  Lane lane = Lane::Arriving;
  double position = 0.0;
  bool operator==(const Mutation&) const = default;
};

struct TestCase {
  StaticPart static_part;
  double x_e = 0.0;
  double v_e = 0.0;
  double x_a = 0.0;
  double x_f = 0.0;
  int horizon = 0;  // steps; 0 means size it automatically
  std::vector<Mutation> mutations;

  void validate() const {
    static_part.validate();
    if (!(x_e > 0.0) || !(x_a > 0.0) || !(x_f > 0.0))
      throw DomainError("test case: x_e, x_a and x_f must be positive");
    if (!(v_e >= 0.0) || !std::isfinite(v_e))
      throw DomainError("test case: v_e must be non-negative");
    if (horizon < 0) throw DomainError("test case: negative horizon");
  }
};

enum class Target { CrossAndStop, StopBeforeZone };
enum class Property { NoCollisionArriving, NoCollisionFront, NoZoneCooccupancy, NoRedLightEntry };

inline const char* to_string(Property p) {
  switch (p) {
    case Property::NoCollisionArriving: return "NoCollisionArriving";
    case Property::NoCollisionFront: return "NoCollisionFront";
    case Property::NoZoneCooccupancy: return "NoZoneCooccupancy";
    case Property::NoRedLightEntry: return "NoRedLightEntry";
  }
  return "?";
}

struct Goal {
  std::vector<Target> targets;
  std::vector<Property> properties;

  bool has(Property p) const {
    for (auto q : properties)
      if (q == p) return true;
    return false;
  }

  static Goal standard(const StaticPart& s) {
    Goal g;
    g.targets = {Target::CrossAndStop, Target::StopBeforeZone};
    g.properties = {Property::NoCollisionArriving, Property::NoCollisionFront,
                    Property::NoZoneCooccupancy};
    if (s.light) g.properties.push_back(Property::NoRedLightEntry);
    return g;
  }
};

// ---------------------------------------------------------------------------
// Expansion.

inline int minimum_horizon(const TestCase& tc, double dt) {
  double need = (tc.x_a + tc.static_part.zone_length()) / tc.static_part.vl;
  return static_cast<int>(std::ceil(need / dt - 1e-9));
}

inline int auto_horizon(const TestCase& tc, double dt) {
  double t = (tc.x_a + tc.static_part.zone_length()) / tc.static_part.vl + 10.0;
  return static_cast<int>(std::ceil(t / dt - 1e-9));
}

inline int effective_horizon(const TestCase& tc, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (tc.horizon == 0) return auto_horizon(tc, dt);
  int need = minimum_horizon(tc, dt);
  if (tc.horizon < need)
    throw DomainError("horizon " + std::to_string(tc.horizon) +
                      " too short: arriving vehicle needs at least n = " +
                      std::to_string(need) + " steps to traverse the zone");
  return tc.horizon;
}

// Environment state at time t for the NPC trajectories of tc.
inline EnvState env_at(const TestCase& tc, double t) {
  const auto& s = tc.static_part;
  EnvState e;
  e.arriving = VehicleState{tc.x_a - s.vl * t, s.vl};
  e.front = VehicleState{tc.x_f, 0.0};
  for (const auto& m : tc.mutations) {
    if (m.lane == Lane::Arriving)
      e.extras.push_back({Lane::Arriving, m.position - s.vl * t, s.vl});
    else
      e.extras.push_back({Lane::Front, m.position, 0.0});
  }
  if (s.light) e.light = s.light->at(t);
  return e;
}

// s[0..n]: n + 1 environment states at t = i * dt.
inline std::vector<EnvState> expand(const TestCase& tc, double dt) {
  tc.validate();
  int n = effective_horizon(tc, dt);
  std::vector<EnvState> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out.push_back(env_at(tc, i * dt));
  return out;
}

inline std::vector<TestCase> equivalence_mutations(const TestCase& tc, double headway) {
  if (!(headway > 0.0)) throw DomainError("equivalence_mutations: headway must be positive");
  TestCase a = tc;
  a.mutations.push_back({Lane::Arriving, tc.x_a + headway});
  TestCase b = tc;
  b.mutations.push_back({Lane::Front, tc.x_f + headway});
  TestCase c = tc;
  c.mutations.push_back({Lane::Arriving, tc.x_a + headway});
  c.mutations.push_back({Lane::Front, tc.x_f + headway});
  return {a, b, c};
}

// Constant-speed zone co-occupancy window with distances to the conflict
// point and a zone [-d, d] around it.
inline bool collision_window(double x_e, double v_e, double x_a, double v_a, double d) {
  if (!(v_e > 0.0) || !(v_a > 0.0))
    throw DomainError("collision_window: undefined for zero speed");
  return std::abs(x_e / v_e - x_a / v_a) <= d / v_e + d / v_a;
}

// Centred distances (to the conflict point) versus the boundary distances
// used by TestCase.
inline double ego_exit_distance(double centred, double d) { return centred + d; }
inline double arriving_entry_distance(double centred, double d) { return centred - d; }

inline bool in_zone(double x, double d) { return x >= -2.0 * d && x <= 0.0; }

// True when an ego holding v_e would violate a zone property, i.e. the test
// case forces the ego to adapt. The front vehicle is not consulted: any
// moving ego eventually reaches it, which says nothing about the conflict.
inline bool is_relevant(const TestCase& tc, double dt = 0.1) {
  tc.validate();
  if (tc.v_e == 0.0) return true;
  const auto& s = tc.static_part;
  double exit_t = tc.x_e / tc.v_e;
  int n = static_cast<int>(std::ceil(exit_t / dt)) + 1;
  bool was_in = false;
  for (int i = 0; i <= n; ++i) {
    double t = i * dt;
    double xe = -tc.x_e + tc.v_e * t;
    if (xe > 0.0) break;
    EnvState env = env_at(tc, t);
    bool ego_in = in_zone(xe, s.d);
    if (ego_in) {
      for (const auto& a : env.arriving_all())
        if (in_zone(a.x, s.d)) return true;
      if (!was_in && env.light == Light::Red) return true;
    }
    was_in = ego_in;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Serialization. Field order is fixed by ordered_json.

using json = nlohmann::ordered_json;

inline json to_json(const StaticPart& s) {
  json j;
  j["scenario_type"] = to_string(s.type);
  j["d"] = s.d;
  j["vl"] = s.vl;
  if (s.light)
    j["light"] = {{"green_s", s.light->green_s}, {"red_s", s.light->red_s},
                  {"offset_s", s.light->offset_s}};
  else
    j["light"] = nullptr;
  return j;
}

inline StaticPart static_from_json(const json& j) {
  StaticPart s;
  s.type = scenario_type_from_string(j.at("scenario_type").get<std::string>());
  s.d = j.value("d", 5.0);
  s.vl = j.value("vl", 10.0);
  if (j.contains("light") && !j.at("light").is_null()) {
    const auto& l = j.at("light");
    LightSchedule ls;
    ls.green_s = l.value("green_s", ls.green_s);
    ls.red_s = l.value("red_s", ls.red_s);
    ls.offset_s = l.value("offset_s", ls.offset_s);
    s.light = ls;
  } else if (s.type == ScenarioType::IntersectionLight && !j.contains("light")) {
    s.light = LightSchedule{};
  }
  s.validate();
  return s;
}

inline json to_json(const TestCase& tc) {
  json j;
  j["static"] = to_json(tc.static_part);
  j["x_e"] = tc.x_e;
  j["v_e"] = tc.v_e;
  j["x_a"] = tc.x_a;
  j["x_f"] = tc.x_f;
  j["horizon"] = tc.horizon;
  json muts = json::array();
  for (const auto& m : tc.mutations)
    muts.push_back({{"lane", to_string(m.lane)}, {"position", m.position}});
  j["mutations"] = muts;
  return j;
}

inline Lane lane_from_string(const std::string& s) {
  if (s == "arriving") return Lane::Arriving;
  if (s == "front") return Lane::Front;
  throw ConfigError("unknown lane '" + s + "'");
}

inline TestCase testcase_from_json(const json& j) {
  TestCase tc;
  tc.static_part = static_from_json(j.at("static"));
  tc.x_e = j.at("x_e").get<double>();
  tc.v_e = j.at("v_e").get<double>();
  tc.x_a = j.at("x_a").get<double>();
  tc.x_f = j.at("x_f").get<double>();
  tc.horizon = j.value("horizon", 0);
  if (j.contains("mutations"))
    for (const auto& m : j.at("mutations"))
      tc.mutations.push_back({lane_from_string(m.at("lane").get<std::string>()),
                              m.at("position").get<double>()});
  tc.validate();
  return tc;
}

inline json to_json(const VehicleState& v) { return {{"x", v.x}, {"v", v.v}}; }

inline json to_json(const EnvState& e) {
  json j;
  j["arriving"] = e.arriving ? to_json(*e.arriving) : json(nullptr);
  j["front"] = e.front ? to_json(*e.front) : json(nullptr);
  json ex = json::array();
  for (const auto& v : e.extras)
    ex.push_back({{"lane", to_string(v.lane)}, {"x", v.x}, {"v", v.v}});
  j["extras"] = ex;
  j["light"] = e.light ? json(to_string(*e.light)) : json(nullptr);
  return j;
}

inline json to_json(const Scene& s) {
  json j;
  j["t"] = s.t;
  j["ego"] = {{"x", s.ego.x}, {"v", s.ego.v}};
  j["env"] = to_json(s.env);
  return j;
}

inline std::optional<VehicleState> vehicle_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return VehicleState{j.at("x").get<double>(), j.at("v").get<double>()};
}

inline Scene scene_from_json(const json& j) {
  Scene s;
  s.t = j.at("t").get<double>();
  s.ego = {j.at("ego").at("x").get<double>(), j.at("ego").at("v").get<double>()};
  const auto& e = j.at("env");
  s.env.arriving = vehicle_from_json(e.at("arriving"));
  s.env.front = vehicle_from_json(e.at("front"));
  for (const auto& v : e.at("extras"))
    s.env.extras.push_back({lane_from_string(v.at("lane").get<std::string>()),
                            v.at("x").get<double>(), v.at("v").get<double>()});
  if (!e.at("light").is_null())
    s.env.light = e.at("light").get<std::string>() == "red" ? Light::Red : Light::Green;
  return s;
}

inline json to_json(const Scenario& sc) {
  json j;
  j["static"] = to_json(sc.static_part);
  j["dt"] = sc.dt;
  json frames = json::array();
  for (const auto& f : sc.frames) frames.push_back(to_json(f));
  j["frames"] = frames;
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario sc;
  sc.static_part = static_from_json(j.at("static"));
  sc.dt = j.at("dt").get<double>();
  for (const auto& f : j.at("frames")) sc.frames.push_back(scene_from_json(f));
  return sc;
}

// Per-frame CSV for plotting; missing vehicles leave empty cells.
inline void write_scenario_csv(const Scenario& sc, std::ostream& out) {
  out << "t,x_e,v_e,x_a,v_a,x_f,light\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& f : sc.frames) {
    out << num(f.t) << ',' << num(f.ego.x) << ',' << num(f.ego.v) << ',';
    if (f.env.arriving) out << num(f.env.arriving->x) << ',' << num(f.env.arriving->v);
    else out << ',';
    out << ',';
    if (f.env.front) out << num(f.env.front->x);
    out << ',';
    if (f.env.light) out << to_string(*f.env.light);
    out << '\n';
  }
}

}  // namespace adlab
