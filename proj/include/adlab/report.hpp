#pragma once

// Campaign reports: per (autopilot, scenario type) cells such as
// "TF (0.80%) IO (12.7%)" or "OF-PD (2/4)", rendered as csv, json or
// markdown.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "adlab/errors.hpp"
#include "adlab/oracle.hpp"
#include "adlab/scenario.hpp"

namespace adlab {

// Classification summary of one grid (one autopilot, scenario type and ego
// initial state).
struct StateResult {
  std::string autopilot;
  ScenarioType type = ScenarioType::IntersectionYield;
  double x_e = 0.0;
  double v_e = 0.0;
  OverallFailure overall = OverallFailure::None;
  LabelCounts all;
  LabelCounts relevant;
  int witnesses = 0;  // rationality counterexamples
  bool protocol_error = false;
  std::string error;
};

struct Cell {
  int tf = 0;
  int is = 0;
  int io = 0;
  int total = 0;  // test cases of initial states without an overall failure
  int of_pd = 0;
  int of_sf = 0;
  int states = 0;
  bool protocol_error = false;

  bool clean() const {
    return !protocol_error && tf == 0 && is == 0 && io == 0 && of_pd == 0 && of_sf == 0;
  }
};

inline Cell aggregate_cell(const std::vector<StateResult>& states, const std::string& ap,
                           ScenarioType t) {
  Cell c;
  for (const auto& s : states) {
    if (s.autopilot != ap || s.type != t) continue;
    ++c.states;
    if (s.protocol_error) {
      c.protocol_error = true;
      continue;
    }
    if (s.overall == OverallFailure::OFPD) ++c.of_pd;
    else if (s.overall == OverallFailure::OFSF) ++c.of_sf;
    else {
      c.tf += s.all.tf;
      c.is += s.all.is;
      c.io += s.all.io;
      c.total += s.all.total;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Cell text.

struct CellEntry {
  std::string label;         // TF, IS, IO, OF-PD, OF-SF
  std::optional<double> pct;  // percentage labels
  int k = 0;                 // OF labels: k of m initial states
  int m = 0;
};

struct CellText {
  bool protocol_error = false;
  std::vector<CellEntry> entries;  // empty means PASS
};

inline std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, pct < 1.0 ? "%.2f" : "%.1f", pct);
  return buf;
}

inline std::string render_cell(const CellText& c) {
  if (c.protocol_error) return "protocol-error";
  if (c.entries.empty()) return "PASS";
  std::string out;
  for (const auto& e : c.entries) {
    if (!out.empty()) out += ' ';
    out += e.label;
    if (e.pct) out += " (" + format_pct(*e.pct) + "%)";
    else out += " (" + std::to_string(e.k) + "/" + std::to_string(e.m) + ")";
  }
  return out;
}

inline CellText cell_text(const Cell& c) {
  CellText t;
  if (c.protocol_error) {
    t.protocol_error = true;
    return t;
  }
  auto pct = [&](int n, const char* label) {
    if (n > 0 && c.total > 0) t.entries.push_back({label, 100.0 * n / c.total, 0, 0});
  };
  pct(c.tf, "TF");
  pct(c.is, "IS");
  pct(c.io, "IO");
  if (c.of_pd > 0) t.entries.push_back({"OF-PD", std::nullopt, c.of_pd, c.states});
  if (c.of_sf > 0) t.entries.push_back({"OF-SF", std::nullopt, c.of_sf, c.states});
  return t;
}

inline std::string render_cell(const Cell& c) { return render_cell(cell_text(c)); }

inline CellText parse_cell(const std::string& text) {
  CellText c;
  if (text == "protocol-error") {
    c.protocol_error = true;
    return c;
  }
  if (text == "PASS") return c;
  static const std::regex entry(R"(\s*(TF|IS|IO|OF-PD|OF-SF|OF-RC) \((?:([0-9]+(?:\.[0-9]+)?)%|([0-9]+)/([0-9]+))\))");
  auto it = text.cbegin();
  std::smatch m;
  while (it != text.cend()) {
    if (!std::regex_search(it, text.cend(), m, entry, std::regex_constants::match_continuous))
      throw ConfigError("cannot parse report cell '" + text + "'");
    CellEntry e;
    e.label = m[1];
    if (m[2].matched) e.pct = std::stod(m[2]);
    else {
      e.k = std::stoi(m[3]);
      e.m = std::stoi(m[4]);
    }
    c.entries.push_back(e);
    it = m[0].second;
    while (it != text.cend() && std::isspace(static_cast<unsigned char>(*it))) ++it;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Campaign report.

struct ZoneStats {
  int generated = 0;  // grid points before gating
  int emitted = 0;    // after removing non-nominal points
  int cautious_only = 0;
  int safe_progress = 0;
  int irrelevant = 0;
  int non_nominal = 0;
};

struct DeterminacySummary {
  std::string autopilot;
  std::optional<DeterminacyReport> braking;
  std::optional<DeterminacyReport> progress;
  std::string braking_error;
  std::string progress_error;
};

struct CoverageSummary {
  ScenarioType type = ScenarioType::IntersectionYield;
  std::vector<double> speeds;
  double ratio = 0.0;
  std::map<std::string, int> corner_passes;  // autopilot -> passing corners
  int corners = 0;
  std::map<std::string, int> spot_passes;  // autopilot -> passing covered samples
  int spot_samples = 0;
};

struct CampaignReport {
  std::vector<std::string> autopilots;
  std::vector<ScenarioType> types;
  std::vector<StateResult> states;
  std::map<ScenarioType, ZoneStats> zones;
  std::vector<DeterminacySummary> determinacy;
  std::vector<CoverageSummary> coverage;

  Cell cell(const std::string& ap, ScenarioType t) const { return aggregate_cell(states, ap, t); }

  bool any_failure() const {
    for (const auto& ap : autopilots)
      for (auto t : types)
        if (!cell(ap, t).clean()) return true;
    return false;
  }
};

enum class ReportFormat { Csv, Json, Markdown };

inline ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + s + "' (expected csv, json or markdown)");
}

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

inline json state_to_json(const StateResult& s) {
  json j;
  j["autopilot"] = s.autopilot;
  j["scenario_type"] = to_string(s.type);
  j["x_e"] = s.x_e;
  j["v_e"] = s.v_e;
  j["of"] = to_string(s.overall);
  j["counts"] = {{"TF", s.all.tf}, {"IS", s.all.is}, {"IO", s.all.io}, {"total", s.all.total}};
  j["counts_relevant"] = {{"TF", s.relevant.tf},
                          {"IS", s.relevant.is},
                          {"IO", s.relevant.io},
                          {"total", s.relevant.total}};
  j["rationality_witnesses"] = s.witnesses;
  j["protocol_error"] = s.protocol_error;
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

inline OverallFailure overall_from_string(const std::string& s) {
  if (s == "none") return OverallFailure::None;
  if (s == "OF-PD") return OverallFailure::OFPD;
  if (s == "OF-SF") return OverallFailure::OFSF;
  throw ConfigError("unknown overall failure '" + s + "'");
}

inline StateResult state_from_json(const json& j) {
  StateResult s;
  s.autopilot = j.at("autopilot").get<std::string>();
  s.type = scenario_type_from_string(j.at("scenario_type").get<std::string>());
  s.x_e = j.at("x_e").get<double>();
  s.v_e = j.at("v_e").get<double>();
  s.overall = overall_from_string(j.at("of").get<std::string>());
  auto counts = [](const json& c) {
    return LabelCounts{c.at("TF").get<int>(), c.at("IS").get<int>(), c.at("IO").get<int>(),
                       c.at("total").get<int>()};
  };
  s.all = counts(j.at("counts"));
  s.relevant = counts(j.at("counts_relevant"));
  s.witnesses = j.value("rationality_witnesses", 0);
  s.protocol_error = j.value("protocol_error", false);
  s.error = j.value("error", std::string{});
  return s;
}

inline json report_to_json(const CampaignReport& r) {
  json j;
  j["autopilots"] = r.autopilots;
  json types = json::array();
  for (auto t : r.types) types.push_back(to_string(t));
  j["scenario_types"] = types;
  json rows = json::array();
  for (auto t : r.types) {
    json row;
    row["scenario_type"] = to_string(t);
    json cells = json::object();
    for (const auto& ap : r.autopilots) {
      Cell c = r.cell(ap, t);
      cells[ap] = {{"text", render_cell(c)}, {"TF", c.tf},       {"IS", c.is},
                   {"IO", c.io},             {"total", c.total}, {"OF-PD", c.of_pd},
                   {"OF-SF", c.of_sf},       {"states", c.states}};
    }
    row["cells"] = cells;
    rows.push_back(row);
  }
  j["rows"] = rows;
  json zones = json::object();
  for (const auto& [t, z] : r.zones)
    zones[to_string(t)] = {{"generated", z.generated},         {"emitted", z.emitted},
                           {"CautiousOnly", z.cautious_only}, {"SafeProgress", z.safe_progress},
                           {"Irrelevant", z.irrelevant},      {"NonNominal", z.non_nominal}};
  j["zones"] = zones;
  json det = json::array();
  for (const auto& d : r.determinacy) {
    json o;
    o["autopilot"] = d.autopilot;
    o["braking"] = d.braking ? to_json(*d.braking) : json(d.braking_error);
    o["progress"] = d.progress ? to_json(*d.progress) : json(d.progress_error);
    det.push_back(o);
  }
  j["determinacy"] = det;
  json cov = json::array();
  for (const auto& c : r.coverage) {
    json o;
    o["scenario_type"] = to_string(c.type);
    o["speeds"] = c.speeds;
    o["ratio"] = c.ratio;
    o["corners"] = c.corners;
    o["corner_passes"] = c.corner_passes;
    o["spot_samples"] = c.spot_samples;
    o["spot_passes"] = c.spot_passes;
    cov.push_back(o);
  }
  j["coverage"] = cov;
  json st = json::array();
  for (const auto& s : r.states) st.push_back(state_to_json(s));
  j["states"] = st;
  return j;
}

inline std::string render_report(const CampaignReport& r, ReportFormat f) {
  std::ostringstream out;
  switch (f) {
    case ReportFormat::Json:
      out << report_to_json(r).dump(2) << '\n';
      break;
    case ReportFormat::Csv:
      out << "scenario_type";
      for (const auto& ap : r.autopilots) out << ',' << detail::csv_field(ap);
      out << '\n';
      for (auto t : r.types) {
        out << detail::csv_field(display_name(t));
        for (const auto& ap : r.autopilots) out << ',' << detail::csv_field(render_cell(r.cell(ap, t)));
        out << '\n';
      }
      break;
    case ReportFormat::Markdown: {
      out << "| Scenario |";
      for (const auto& ap : r.autopilots) out << ' ' << ap << " |";
      out << "\n|---|";
      for (std::size_t i = 0; i < r.autopilots.size(); ++i) out << "---|";
      out << '\n';
      for (auto t : r.types) {
        out << "| " << display_name(t) << " |";
        for (const auto& ap : r.autopilots) out << ' ' << render_cell(r.cell(ap, t)) << " |";
        out << '\n';
      }
      if (!r.zones.empty()) {
        out << "\n| Zones | generated | emitted | CautiousOnly | SafeProgress | Irrelevant | NonNominal |\n"
               "|---|---|---|---|---|---|---|\n";
        for (const auto& [t, z] : r.zones)
          out << "| " << display_name(t) << " | " << z.generated << " | " << z.emitted << " | "
              << z.cautious_only << " | " << z.safe_progress << " | " << z.irrelevant << " | "
              << z.non_nominal << " |\n";
      }
      if (!r.determinacy.empty()) {
        out << "\n| Determinacy | braking max dev (m) | braking | progress max dv (m/s) | progress |\n"
               "|---|---|---|---|---|\n";
        auto cellfor = [](const std::optional<DeterminacyReport>& d, const std::string& err)
            -> std::pair<std::string, std::string> {
          if (!d) return {"-", err.empty() ? "skipped" : "inapplicable"};
          std::string dev = std::isfinite(d->max_deviation) ? detail::fixed(d->max_deviation, 3) : "inf";
          return {dev, d->determinate ? "determinate" : "non-determinate"};
        };
        for (const auto& d : r.determinacy) {
          auto [bd, bs] = cellfor(d.braking, d.braking_error);
          auto [pd, ps] = cellfor(d.progress, d.progress_error);
          out << "| " << d.autopilot << " | " << bd << " | " << bs << " | " << pd << " | " << ps
              << " |\n";
        }
      }
      if (!r.coverage.empty()) {
        out << "\n| Coverage | speeds | ratio |";
        for (const auto& ap : r.autopilots) out << ' ' << ap << " |";
        out << "\n|---|---|---|";
        for (std::size_t i = 0; i < r.autopilots.size(); ++i) out << "---|";
        out << '\n';
        for (const auto& c : r.coverage) {
          std::string sp;
          for (double v : c.speeds) sp += (sp.empty() ? "" : " ") + detail::fixed(v, 2);
          out << "| " << display_name(c.type) << " | " << sp << " | " << detail::fixed(c.ratio, 4)
              << " |";
          for (const auto& ap : r.autopilots) {
            auto cp = c.corner_passes.count(ap) ? c.corner_passes.at(ap) : 0;
            auto spp = c.spot_passes.count(ap) ? c.spot_passes.at(ap) : 0;
            out << " corners " << cp << "/" << c.corners << ", samples " << spp << "/"
                << c.spot_samples << " |";
          }
          out << '\n';
        }
      }
      break;
    }
  }
  return out.str();
}

inline std::string render_report(const CampaignReport& r, const std::string& format) {
  return render_report(r, report_format_from_string(format));
}

}  // namespace adlab
