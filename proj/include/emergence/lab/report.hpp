#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "emergence/error.hpp"
#include "emergence/lab/config.hpp"
#include "emergence/particle.hpp"

namespace emergence::lab {

/// One pass/fail comparison. `relation` spells out how measured, expected
/// and tolerance were combined.
struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string relation;
  bool pass = false;
  std::string note;
};

/// |measured - expected| <= tolerance
inline Check check_abs(std::string name, double measured, double expected, double tolerance) {
  return {std::move(name), measured, expected, tolerance, "|measured - expected| <= tolerance",
          std::abs(measured - expected) <= tolerance, ""};
}

/// |measured - expected| <= tolerance * |expected|
inline Check check_rel(std::string name, double measured, double expected, double tolerance) {
  return {std::move(name), measured, expected, tolerance, "|measured - expected| <= tolerance * |expected|",
          std::abs(measured - expected) <= tolerance * std::abs(expected), ""};
}

/// measured <= bound (an error or deviation that must stay small)
inline Check check_below(std::string name, double measured, double bound) {
  return {std::move(name), measured, 0.0, bound, "measured <= tolerance", measured <= bound, ""};
}

/// measured > bound
inline Check check_above(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, 0.0, "measured > expected", measured > bound, ""};
}

inline Check check_flag(std::string name, bool value, std::string note = "") {
  return {std::move(name), value ? 1.0 : 0.0, 1.0, 0.0, "measured == expected", value, std::move(note)};
}

/// Delimited table with a header row.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size())
      throw InvalidArgument("table '" + name + "': row has " + std::to_string(row.size()) + " values for " +
                            std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }
};

/// Results of one experiment.
struct Section {
  std::string experiment;
  std::vector<Check> checks;
  json observations = json::object();  ///< reported values without a gate
  std::vector<Table> tables;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

struct RunReport {
  std::string experiment;
  std::string run_id;
  ExperimentConfig config;
  std::vector<Section> sections;

  bool pass() const {
    return !sections.empty() && std::all_of(sections.begin(), sections.end(), [](const Section& s) { return s.pass(); });
  }
};

/// Shortest decimal that reads back to the same double; "nan"/"inf" spelled out.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline json conventions_json() {
  return json{{"kappa", convention_kappa},
              {"energy_kappa", energy_kappa},
              {"light_speed", 1.0},
              {"units", "lattice units: lengths in units of the configured spacing scale, hbar = c = 1"},
              {"mode_convention", "alpha_k = (1/sqrt2) <f_k, sqrt(omega) phi + i pi / sqrt(omega)>"},
              {"symplectic", std::string(symplectic_convention)}};
}

inline json to_json(const Check& c) {
  json j{{"name", c.name},         {"measured", c.measured}, {"expected", c.expected},
         {"tolerance", c.tolerance}, {"relation", c.relation}, {"pass", c.pass}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline json to_json(const RunReport& r) {
  json sections = json::array();
  for (const auto& s : r.sections) {
    json checks = json::array();
    for (const auto& c : s.checks) checks.push_back(to_json(c));
    json tables = json::array();
    for (const auto& t : s.tables) tables.push_back(t.name + ".tsv");
    sections.push_back(json{{"experiment", s.experiment},
                            {"pass", s.pass()},
                            {"checks", checks},
                            {"observations", s.observations},
                            {"tables", tables}});
  }
  return json{{"schema", "emergence-lab.report/1"},
              {"experiment", r.experiment},
              {"run", r.run_id},
              {"seed", r.config.seed()},
              {"config", r.config.values()},
              {"conventions", conventions_json()},
              {"sections", sections},
              {"pass", r.pass()},
              {"status", r.pass() ? "pass" : "fail"}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

/// Table text: a '#' preamble (table name, experiment, config echo,
/// conventions), the tab-separated header row, then one line per row.
inline std::string render_table(const Table& t, const std::string& experiment, const ExperimentConfig& cfg) {
  std::string out = "# table: " + t.name + "\n# experiment: " + experiment + "\n";
  out += "# config: " + cfg.values().dump() + "\n";
  out += "# conventions: " + conventions_json().dump() + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "\t" : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

inline std::filesystem::path emit_table(const std::filesystem::path& dir, const Table& t, const std::string& experiment,
                                        const ExperimentConfig& cfg) {
  const auto path = dir / (t.name + ".tsv");
  write_text(path, render_table(t, experiment, cfg));
  return path;
}

/// Writes every table and report.<run>.json into `dir`; returns the report path.
inline std::filesystem::path write_outputs(const std::filesystem::path& dir, const RunReport& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& s : r.sections)
    for (const auto& t : s.tables) emit_table(dir, t, s.experiment, r.config);
  const auto path = dir / ("report." + r.run_id + ".json");
  write_text(path, to_json(r).dump(2) + "\n");
  return path;
}

}  // namespace emergence::lab
