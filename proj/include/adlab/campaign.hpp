#pragma once

// Campaign pipeline: for every autopilot, scenario type and ego initial
// state, compute the boundary, simulate a gated grid (or boundary probes)
// around it and classify; then a partition stage and a determinacy stage.
// Results are aggregated by task index so the report does not depend on the
// number of workers.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adlab/autopilot.hpp"
#include "adlab/criticality.hpp"
#include "adlab/errors.hpp"
#include "adlab/external.hpp"
#include "adlab/oracle.hpp"
#include "adlab/partition.hpp"
#include "adlab/report.hpp"
#include "adlab/scenario.hpp"
#include "adlab/simulator.hpp"

namespace adlab {

struct AutopilotEntry {
  std::string id;
  std::optional<AutopilotSpec> builtin;
  std::string command;  // external process when builtin is empty
  ADProfile profile = ADProfile::constant_rate(2.0, 4.0, 15.0);

  const ADProfile& vehicle() const { return builtin ? builtin->profile : profile; }
};

struct GridSpec {
  bool probe = false;     // boundary-probe mode instead of a full grid
  int n_a = 20;
  int n_f = 20;
  double x_a_lo = 0.5;    // times x_hat_a
  double x_a_hi = 0.2;    // x_tilde_a plus this fraction of (x_tilde_a - x_hat_a)
  double x_f_lo = 0.5;    // times x_hat_f
  double x_f_hi = 2.5;    // times x_hat_f
  int n_probe = 8;
  double spread = 2.0;
};

struct PartitionSpec {
  bool enabled = true;
  std::vector<double> speeds;  // empty: the v_e list, decreasing
  int steps = 200;
  std::optional<double> x_f_cap;
  int spot_samples = 200;
};

struct DeterminacySpec {
  bool enabled = true;
  int restart_every = 5;
  std::optional<double> braking_v0;  // default min(30, v_max)
  double braking_x_f = 200.0;
};

struct CampaignConfig {
  std::vector<ScenarioType> types{std::begin(kAllScenarioTypes), std::end(kAllScenarioTypes)};
  std::vector<AutopilotEntry> autopilots;
  ADProfile profile = ADProfile::constant_rate(2.0, 4.0, 15.0);
  double d = 5.0;
  double vl = 10.0;
  double x_e = 25.0;
  std::vector<double> v_e{4.0, 6.0, 8.0, 10.0};
  GridSpec grid;
  PartitionSpec partition;
  DeterminacySpec determinacy;
  SimConfig sim;
  int workers = 0;  // 0: hardware concurrency
  std::uint64_t seed = 1;
  std::string output_dir;

  StaticPart static_for(ScenarioType t) const { return StaticPart::make(t, d, vl); }
};

// ---------------------------------------------------------------------------
// Config parsing. Unknown keys are errors.

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": bad value for '" + key + "'");
  }
}

inline ADProfile profile_from_json(const json& j, const std::string& where) {
  check_keys(j, {"a_max", "b_max", "v_max"}, where);
  try {
    return ADProfile::constant_rate(j.at("a_max").get<double>(), j.at("b_max").get<double>(),
                                    j.at("v_max").get<double>());
  } catch (const json::exception&) {
    throw ConfigError(where + ": profile needs numeric a_max, b_max, v_max");
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline RateTable rates_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected [[speed, rate], ...]");
  std::map<double, double> m;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ConfigError(where + ": expected [[speed, rate], ...]");
    m[p[0].get<double>()] = p[1].get<double>();
  }
  try {
    return RateTable(m);
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline AutopilotEntry autopilot_from_json(const json& j, const ADProfile& dflt) {
  AutopilotEntry e;
  e.profile = dflt;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s.rfind("exec:", 0) == 0) {
      e.id = s;
      e.command = s.substr(5);
      if (e.command.empty()) throw ConfigError("autopilot 'exec:' needs a command");
      return e;
    }
    e.id = s;
    e.builtin = make_autopilot(s);
    return e;
  }
  const std::string where = "autopilot";
  check_keys(j, {"id", "variant", "command", "profile", "params"}, where);
  e.id = get<std::string>(j, "id", "", where);
  if (e.id.empty()) throw ConfigError("autopilot: missing id");
  if (j.contains("profile")) e.profile = profile_from_json(j.at("profile"), where + " " + e.id);
  if (j.contains("command")) {
    e.command = j.at("command").get<std::string>();
    return e;
  }
  std::string var = get<std::string>(j, "variant", e.id, where);
  AutopilotSpec ap = make_autopilot(var);
  ap.id = e.id;
  if (j.contains("profile")) ap.profile = e.profile;
  json params = j.value("params", json::object());
  const std::string pw = "autopilot " + e.id + " params";
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, variant::TransitionFlawed>) {
          check_keys(params, {"optimism"}, pw);
          v.optimism = get<double>(params, "optimism", v.optimism, pw);
          if (!(v.optimism > 1.0)) throw ConfigError(pw + ": optimism must be > 1");
        } else if constexpr (std::is_same_v<T, variant::Overcautious>) {
          check_keys(params, {"margin_inflation"}, pw);
          v.margin_inflation = get<double>(params, "margin_inflation", v.margin_inflation, pw);
          if (!(v.margin_inflation > 1.0)) throw ConfigError(pw + ": margin_inflation must be > 1");
        } else if constexpr (std::is_same_v<T, variant::Irrational>) {
          check_keys(params, {"u_lo", "u_hi", "w_lo", "w_hi", "only_scenario"}, pw);
          v.u_lo = get<double>(params, "u_lo", v.u_lo, pw);
          v.u_hi = get<double>(params, "u_hi", v.u_hi, pw);
          v.w_lo = get<double>(params, "w_lo", v.w_lo, pw);
          v.w_hi = get<double>(params, "w_hi", v.w_hi, pw);
          if (!(0.0 < v.u_lo && v.u_lo < v.u_hi && v.u_hi < 1.0 && 0.0 < v.w_lo && v.w_lo < v.w_hi))
            throw ConfigError(pw + ": fail region must lie strictly inside the safe-progress zone");
          if (params.contains("only_scenario")) {
            if (params["only_scenario"].is_null()) v.only_scenario.reset();
            else v.only_scenario = scenario_type_from_string(params["only_scenario"].get<std::string>());
          }
        } else if constexpr (std::is_same_v<T, variant::NonDeterminateBrake> ||
                             std::is_same_v<T, variant::NonDeterminateAccel>) {
          check_keys(params, {"rate_by_initial_speed"}, pw);
          if (params.contains("rate_by_initial_speed"))
            v.rate_by_initial_speed = rates_from_json(params["rate_by_initial_speed"], pw);
        } else {
          check_keys(params, {}, pw);
        }
      },
      ap.variant);
  e.builtin = ap;
  return e;
}

}  // namespace detail

inline CampaignConfig default_campaign_config() {
  CampaignConfig c;
  for (const auto& id : builtin_autopilots()) {
    AutopilotEntry e;
    e.id = id;
    e.builtin = make_autopilot(id);
    c.autopilots.push_back(e);
  }
  return c;
}

inline CampaignConfig campaign_config_from_json(const json& j) {
  using detail::check_keys;
  using detail::get;
  const std::string w = "config";
  check_keys(j, {"scenario_types", "autopilots", "profile", "d", "vl", "x_e", "v_e", "grid",
                 "partition", "determinacy", "sim", "workers", "seed", "output_dir"},
             w);
  CampaignConfig c = default_campaign_config();
  try {
    if (j.contains("profile")) c.profile = detail::profile_from_json(j["profile"], "config.profile");
    if (j.contains("scenario_types")) {
      c.types.clear();
      for (const auto& t : j["scenario_types"]) c.types.push_back(scenario_type_from_string(t.get<std::string>()));
    }
    if (j.contains("autopilots")) {
      c.autopilots.clear();
      std::set<std::string> seen;
      for (const auto& a : j["autopilots"]) {
        auto e = detail::autopilot_from_json(a, c.profile);
        if (!seen.insert(e.id).second) throw ConfigError("duplicate autopilot id '" + e.id + "'");
        c.autopilots.push_back(e);
      }
    }
    c.d = get<double>(j, "d", c.d, w);
    c.vl = get<double>(j, "vl", c.vl, w);
    c.x_e = get<double>(j, "x_e", c.x_e, w);
    if (j.contains("v_e")) c.v_e = j["v_e"].get<std::vector<double>>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      const std::string gw = "config.grid";
      check_keys(g, {"mode", "n_a", "n_f", "x_a_lo", "x_a_hi", "x_f_lo", "x_f_hi", "n_probe", "spread"}, gw);
      std::string mode = get<std::string>(g, "mode", "grid", gw);
      if (mode != "grid" && mode != "probe") throw ConfigError(gw + ": mode must be grid or probe");
      c.grid.probe = mode == "probe";
      c.grid.n_a = get<int>(g, "n_a", c.grid.n_a, gw);
      c.grid.n_f = get<int>(g, "n_f", c.grid.n_f, gw);
      c.grid.x_a_lo = get<double>(g, "x_a_lo", c.grid.x_a_lo, gw);
      c.grid.x_a_hi = get<double>(g, "x_a_hi", c.grid.x_a_hi, gw);
      c.grid.x_f_lo = get<double>(g, "x_f_lo", c.grid.x_f_lo, gw);
      c.grid.x_f_hi = get<double>(g, "x_f_hi", c.grid.x_f_hi, gw);
      c.grid.n_probe = get<int>(g, "n_probe", c.grid.n_probe, gw);
      c.grid.spread = get<double>(g, "spread", c.grid.spread, gw);
      if (c.grid.n_a < 1 || c.grid.n_f < 1 || c.grid.n_probe < 1 || !(c.grid.spread > 0.0))
        throw ConfigError(gw + ": counts must be >= 1 and spread > 0");
    }
    if (j.contains("partition")) {
      const auto& p = j["partition"];
      const std::string pw = "config.partition";
      check_keys(p, {"enabled", "speeds", "steps", "x_f_cap", "spot_samples"}, pw);
      c.partition.enabled = get<bool>(p, "enabled", true, pw);
      if (p.contains("speeds")) c.partition.speeds = p["speeds"].get<std::vector<double>>();
      c.partition.steps = get<int>(p, "steps", c.partition.steps, pw);
      if (p.contains("x_f_cap") && !p["x_f_cap"].is_null()) c.partition.x_f_cap = p["x_f_cap"].get<double>();
      c.partition.spot_samples = get<int>(p, "spot_samples", c.partition.spot_samples, pw);
    }
    if (j.contains("determinacy")) {
      const auto& d = j["determinacy"];
      const std::string dw = "config.determinacy";
      check_keys(d, {"enabled", "restart_every", "braking_v0", "braking_x_f"}, dw);
      c.determinacy.enabled = get<bool>(d, "enabled", true, dw);
      c.determinacy.restart_every = get<int>(d, "restart_every", c.determinacy.restart_every, dw);
      if (d.contains("braking_v0") && !d["braking_v0"].is_null()) c.determinacy.braking_v0 = d["braking_v0"].get<double>();
      c.determinacy.braking_x_f = get<double>(d, "braking_x_f", c.determinacy.braking_x_f, dw);
    }
    if (j.contains("sim")) {
      const auto& s = j["sim"];
      check_keys(s, {"dt", "max_steps", "zone_epsilon"}, "config.sim");
      c.sim.dt = get<double>(s, "dt", c.sim.dt, "config.sim");
      c.sim.max_steps = get<int>(s, "max_steps", c.sim.max_steps, "config.sim");
      c.sim.zone_epsilon = get<double>(s, "zone_epsilon", c.sim.zone_epsilon, "config.sim");
    }
    c.workers = get<int>(j, "workers", c.workers, w);
    c.seed = get<std::uint64_t>(j, "seed", c.seed, w);
    c.output_dir = get<std::string>(j, "output_dir", c.output_dir, w);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.types.empty() || c.autopilots.empty() || c.v_e.empty())
    throw ConfigError("config: scenario_types, autopilots and v_e must be non-empty");
  if (!(c.x_e > 0.0) || !(c.d > 0.0) || !(c.vl > 0.0) || !(c.sim.dt > 0.0))
    throw ConfigError("config: x_e, d, vl and sim.dt must be positive");
  for (double v : c.v_e)
    if (v < 0.0) throw ConfigError("config: negative v_e");
  return c;
}

inline CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return campaign_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Execution.

// Fixed-size worker pool over indices [0, n); fn(i) writes only slot i.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  unsigned w = workers > 0 ? static_cast<unsigned>(workers) : std::thread::hardware_concurrency();
  w = std::max(1u, std::min<unsigned>(w, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < w; ++k) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline SimOutcome simulate_entry(const AutopilotEntry& e, const TestCase& tc, const SimConfig& cfg) {
  if (e.builtin) return simulate(*e.builtin, tc, cfg);
  ExternalController ctrl(e.command);
  return simulate_with(ctrl, e.profile, tc, cfg);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n == 1) return {0.5 * (lo + hi)};
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

struct GridPlan {
  CriticalBoundary boundary;
  std::vector<TestCase> cases;
  ZoneStats zones;
};

// Test cases around the boundary for one ego initial state; non-nominal
// points are counted and dropped.
inline GridPlan plan_grid(const GridSpec& g, const StaticPart& s, const ADProfile& p, double x_e,
                          double v_e) {
  GridPlan plan;
  plan.boundary = most_critical(x_e, v_e, p, s);
  const auto& b = plan.boundary;
  std::vector<TestCase> raw;
  if (g.probe) {
    raw = boundary_probe(x_e, v_e, p, s, g.n_probe, g.spread);
    plan.zones.generated = g.n_probe;
  } else {
    double hi_a = std::isfinite(b.x_tilde_a) ? b.x_tilde_a + g.x_a_hi * (b.x_tilde_a - b.x_hat_a)
                                             : 3.0 * b.x_hat_a;
    for (double xa : linspace(g.x_a_lo * b.x_hat_a, hi_a, g.n_a))
      for (double xf : linspace(g.x_f_lo * b.x_hat_f, g.x_f_hi * b.x_hat_f, g.n_f)) {
        TestCase tc;
        tc.static_part = s;
        tc.x_e = x_e;
        tc.v_e = v_e;
        tc.x_a = xa;
        tc.x_f = xf;
        raw.push_back(tc);
      }
    plan.zones.generated = static_cast<int>(raw.size());
  }
  for (auto& tc : raw) {
    Zone z = classify_zone(tc, b);
    if (z == Zone::NonNominal) {
      ++plan.zones.non_nominal;
      continue;
    }
    if (z == Zone::CautiousOnly) ++plan.zones.cautious_only;
    if (z == Zone::SafeProgress) ++plan.zones.safe_progress;
    if (z == Zone::Irrelevant) ++plan.zones.irrelevant;
    plan.cases.push_back(tc);
  }
  plan.zones.emitted = static_cast<int>(plan.cases.size());
  return plan;
}

struct GridRun {
  GridResult grid;
  std::optional<Classification> classification;
  StateResult state;
  ZoneStats zones;
};

inline GridRun run_grid(const AutopilotEntry& e, const GridSpec& g, const StaticPart& s, double x_e,
                        double v_e, const SimConfig& cfg) {
  GridRun r;
  GridPlan plan = plan_grid(g, s, e.vehicle(), x_e, v_e);
  r.zones = plan.zones;
  r.grid.static_part = s;
  r.grid.x_e = x_e;
  r.grid.v_e = v_e;
  r.grid.dt = cfg.dt;
  r.grid.boundary = plan.boundary;
  r.state.autopilot = e.id;
  r.state.type = s.type;
  r.state.x_e = x_e;
  r.state.v_e = v_e;
  Goal goal = Goal::standard(s);
  try {
    for (const auto& tc : plan.cases) {
      GridPoint p{tc.x_a, tc.x_f, classify_zone(tc, plan.boundary), std::nullopt};
      p.verdict = verdict(simulate_entry(e, tc, cfg), goal);
      r.grid.points.push_back(p);
    }
  } catch (const ProtocolError& err) {
    r.state.protocol_error = true;
    r.state.error = err.what();
    return r;
  }
  if (r.grid.points.empty()) return r;
  r.classification = classify_grid(r.grid);
  const auto& c = *r.classification;
  r.state.overall = c.overall;
  r.state.all = c.all;
  r.state.relevant = c.relevant;
  r.state.witnesses = static_cast<int>(rationality_check(r.grid).size());
  return r;
}

namespace detail {

inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::string slug(const std::string& s) {
  std::string o;
  for (char ch : s) o += std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' ? ch : '_';
  return o;
}

inline std::string raw_name(const StateResult& s) {
  return slug(s.autopilot) + "__" + to_string(s.type) + "__xe" + fixed(s.x_e, 2) + "__ve" +
         fixed(s.v_e, 2) + ".json";
}

}  // namespace detail

struct CampaignResult {
  CampaignReport report;
  std::vector<GridRun> runs;  // task order: autopilot, scenario type, v_e
};

inline CampaignResult run_campaign(const CampaignConfig& cfg) {
  CampaignResult res;
  auto& rep = res.report;
  for (const auto& a : cfg.autopilots) rep.autopilots.push_back(a.id);
  rep.types = cfg.types;

  struct Task {
    std::size_t ap;
    ScenarioType type;
    double v_e;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < cfg.autopilots.size(); ++a)
    for (auto t : cfg.types)
      for (double v : cfg.v_e) tasks.push_back({a, t, v});
  res.runs.resize(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const Task& t = tasks[i];
    res.runs[i] = run_grid(cfg.autopilots[t.ap], cfg.grid, cfg.static_for(t.type), cfg.x_e, t.v_e, cfg.sim);
  });
  for (const auto& r : res.runs) {
    rep.states.push_back(r.state);
    auto& z = rep.zones[r.state.type];
    z.generated += r.zones.generated;
    z.emitted += r.zones.emitted;
    z.cautious_only += r.zones.cautious_only;
    z.safe_progress += r.zones.safe_progress;
    z.irrelevant += r.zones.irrelevant;
    z.non_nominal += r.zones.non_nominal;
  }

  if (cfg.partition.enabled) {
    std::vector<double> speeds = cfg.partition.speeds;
    if (speeds.empty()) {
      std::set<double> u(cfg.v_e.begin(), cfg.v_e.end());
      speeds.assign(u.rbegin(), u.rend());
    }
    if (speeds.size() >= 2 && speeds.back() > 0.0) {
      for (auto t : cfg.types) {
        StaticPart s = cfg.static_for(t);
        SpeedPartition part = build_partition(cfg.x_e, speeds, cfg.profile, s);
        CoverageResult cov = coverage_ratio(part, cfg.partition.x_f_cap, cfg.partition.steps);
        CoverageSummary cs;
        cs.type = t;
        cs.speeds = speeds;
        cs.ratio = cov.ratio;
        std::vector<TestCase> corners;
        for (std::size_t i = 0; i < part.corners.size(); ++i)
          for (double v : {part.speeds[i], part.speeds[i + 1]})
            corners.push_back({s, cfg.x_e, v, part.corners[i].x_a, part.corners[i].x_f});
        std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(t) + 1)));
        std::vector<TestCase> spots;
        for (int k = 0; k < cfg.partition.spot_samples; ++k) {
          double v = speeds.back() + (speeds.front() - speeds.back()) * detail::unit_draw(rng);
          const Corner& c = part.corners[interval_of(part, v)];
          CriticalBoundary b = most_critical(cfg.x_e, v, cfg.profile, s);
          double xa = c.x_a + (b.x_tilde_a - c.x_a) * detail::unit_draw(rng);
          double xf = c.x_f + (cov.x_f_cap - c.x_f) * detail::unit_draw(rng);
          spots.push_back({s, cfg.x_e, v, xa, xf});
        }
        cs.corners = static_cast<int>(corners.size());
        cs.spot_samples = static_cast<int>(spots.size());
        Goal goal = Goal::standard(s);
        std::vector<TestCase> all = corners;
        all.insert(all.end(), spots.begin(), spots.end());
        for (const auto& e : cfg.autopilots) {
          std::vector<char> pass(all.size(), 0);
          bool proto = false;
          std::mutex mu;
          parallel_for(all.size(), e.builtin ? cfg.workers : 1, [&](std::size_t i) {
            TestCase tc = all[i];
            // TestCase speeds must stay within the autopilot's own profile.
            if (tc.v_e > e.vehicle().v_max()) return;
            try {
              pass[i] = verdict(simulate_entry(e, tc, cfg.sim), goal).pass();
            } catch (const ProtocolError&) {
              std::lock_guard<std::mutex> lk(mu);
              proto = true;
            }
          });
          int cp = 0;
          int sp = 0;
          for (std::size_t i = 0; i < all.size(); ++i)
            (i < corners.size() ? cp : sp) += pass[i];
          cs.corner_passes[e.id] = proto ? 0 : cp;
          cs.spot_passes[e.id] = proto ? 0 : sp;
        }
        rep.coverage.push_back(cs);
      }
    }
  }

  if (cfg.determinacy.enabled) {
    rep.determinacy.resize(cfg.autopilots.size());
    parallel_for(cfg.autopilots.size(), cfg.workers, [&](std::size_t i) {
      const auto& e = cfg.autopilots[i];
      auto& d = rep.determinacy[i];
      d.autopilot = e.id;
      if (!e.builtin) {
        d.braking_error = d.progress_error = "external autopilot";
        return;
      }
      const AutopilotSpec& ap = *e.builtin;
      double v0 = cfg.determinacy.braking_v0.value_or(std::min(30.0, ap.profile.v_max()));
      v0 = std::min(v0, ap.profile.v_max());
      try {
        d.braking = determinacy_check_braking(ap, v0, cfg.determinacy.braking_x_f,
                                              cfg.determinacy.restart_every, std::nullopt, cfg.sim);
      } catch (const std::exception& ex) {
        d.braking_error = ex.what();
      }
      try {
        ScenarioType t = cfg.types.front();
        for (auto x : cfg.types)
          if (x == ScenarioType::IntersectionYield) t = x;
        StaticPart s = cfg.static_for(t);
        double v = std::min(cfg.v_e.front(), ap.profile.v_max());
        CriticalBoundary b = most_critical(cfg.x_e, v, ap.profile, s);
        // The most critical of a few progressively safer cases that the
        // original run passes with progress.
        std::string last_err;
        for (double f : {0.0, 0.1, 0.25, 0.5}) {
          double span_a = std::isfinite(b.x_tilde_a) ? b.x_tilde_a - b.x_hat_a : b.x_hat_a;
          TestCase tc{s, cfg.x_e, v, b.x_hat_a + 0.5 + f * span_a, b.x_hat_f + 0.5 + f * b.x_hat_f};
          try {
            d.progress = determinacy_check_progress(ap, tc, cfg.determinacy.restart_every, 0.2, cfg.sim);
            break;
          } catch (const AnalysisError& ex) {
            last_err = ex.what();
          }
        }
        if (!d.progress) d.progress_error = last_err;
      } catch (const std::exception& ex) {
        d.progress_error = ex.what();
      }
    });
  }
  return res;
}

// Raw per-grid JSON plus the rendered summaries.
inline void write_campaign_outputs(const CampaignResult& res, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "raw");
  for (const auto& r : res.runs) {
    json j = state_to_json(r.state);
    if (r.classification) j["grid"] = to_json(r.grid, *r.classification);
    std::ofstream(fs::path(dir) / "raw" / detail::raw_name(r.state)) << j.dump(2) << '\n';
  }
  std::ofstream(fs::path(dir) / "campaign.json") << render_report(res.report, ReportFormat::Json);
  std::ofstream(fs::path(dir) / "summary.csv") << render_report(res.report, ReportFormat::Csv);
  std::ofstream(fs::path(dir) / "report.md") << render_report(res.report, ReportFormat::Markdown);
}

// Rebuilds the report table from a campaign output directory. Row and column
// order come from campaign.json when present, otherwise from the raw files.
inline CampaignReport load_campaign_report(const std::string& dir) {
  namespace fs = std::filesystem;
  CampaignReport rep;
  fs::path raw = fs::path(dir) / "raw";
  if (!fs::is_directory(raw)) throw ConfigError("no raw results under '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(raw))
    if (f.path().extension() == ".json") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    rep.states.push_back(state_from_json(json::parse(in)));
  }
  fs::path manifest = fs::path(dir) / "campaign.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    json m = json::parse(in);
    rep.autopilots = m.at("autopilots").get<std::vector<std::string>>();
    for (const auto& t : m.at("scenario_types")) rep.types.push_back(scenario_type_from_string(t.get<std::string>()));
  } else {
    std::set<std::string> aps;
    std::set<ScenarioType> ts;
    for (const auto& s : rep.states) {
      aps.insert(s.autopilot);
      ts.insert(s.type);
    }
    rep.autopilots.assign(aps.begin(), aps.end());
    rep.types.assign(ts.begin(), ts.end());
  }
  std::sort(rep.states.begin(), rep.states.end(), [&](const StateResult& a, const StateResult& b) {
    return std::tie(a.autopilot, a.type, a.v_e) < std::tie(b.autopilot, b.type, b.v_e);
  });
  return rep;
}

}  // namespace adlab
