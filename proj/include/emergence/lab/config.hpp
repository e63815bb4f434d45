#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "emergence/error.hpp"
#include "emergence/serialize.hpp"

namespace emergence::lab {

using nlohmann::json;

/// Configuration file or value is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Every recognised key with its default. The schema is flat: a single JSON
/// object whose keys are dotted names and whose values are numbers, strings
/// or arrays of numbers.
inline json default_config_values() {
  return json{
      {"seed", 12345},
      {"mass", 1.0},
      {"spacing", 1.0},
      {"sites", 512},
      {"operator", "klein-gordon"},
      {"modulation", 0.3},

      {"kernel.exponents", {-0.5, 0.5, -1.0}},
      {"kernel.window", {3.0, 20.0}},
      {"kernel.tolerance", 0.1},
      {"kernel.slow_modulation", 0.2},

      {"modes.sites", 16},
      {"modes.samples", 20},
      {"modes.times", {0.7, 13.1, 100.0}},
      {"modes.tolerance", 1e-10},

      {"geometry.sites", 128},
      {"geometry.pairs", 100},
      {"geometry.time", 100.0},
      {"geometry.tolerance", 1e-9},
      {"geometry.time_tolerance", 1e-8},
      {"geometry.locality_tolerance", 0.15},

      {"segal.sites", 48},
      {"segal.pairs", 50},
      {"segal.tolerance", 1e-9},

      {"oracle.sites", 10},
      {"oracle.spacing", 0.7},
      {"oracle.modes", {0, 3, 5}},
      {"oracle.n_max", 14},
      {"oracle.coherent_amplitude", 0.8},
      {"oracle.two_point_sites", 3},
      {"oracle.lambdas", {0.01, 0.02, 0.04, 0.08, 0.16}},
      {"oracle.exponent_tolerance", 0.1},

      {"localize.width", 5.0},
      {"localize.gate", 1.2},

      {"elp.count", 10},
      {"elp.offset", 20.0},
      {"elp.region_radius", 40.0},

      {"nw.sites", 512},
      {"nw.samples", 20},
      {"nw.time", 10.0},
      {"nw.tolerance", 1e-9},
      {"nw.width_tolerance", 0.25},
      {"nw.packet_width", 20.0},
      {"nw.fidelity_tolerance", 0.01},
      {"nw.leak_sites", 1024},
      {"nw.leak_radius", 10.0},
      {"nw.leak_width", 3.0},
      {"nw.leak_time", 5.0},

      {"asymptotics.symbol", json::array()},
      {"asymptotics.lambdas", {-0.5, -1.0}},
      {"asymptotics.radii", {2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}},
      {"asymptotics.tolerance", 1e-4},
      {"asymptotics.rate_tolerance", 0.05},
      {"asymptotics.lattice_tolerance", 0.15},
  };
}

class ExperimentConfig {
 public:
  ExperimentConfig() : values_(default_config_values()) {}

  /// Defaults overridden by the keys of `overrides`.
  static ExperimentConfig from_json(const json& overrides) {
    if (!overrides.is_object()) throw ConfigError("configuration must be a JSON object of key/value pairs");
    ExperimentConfig cfg;
    for (const auto& [key, value] : overrides.items()) cfg.set(key, value);
    cfg.validate();
    return cfg;
  }

  static ExperimentConfig load(const std::string& path) {
    try {
      return from_json(serial::read_file(path));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }

  void set(const std::string& key, const json& value) {
    const auto defaults = default_config_values();
    if (!defaults.contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
    const json& ref = defaults.at(key);
    const bool ok = (ref.is_number() && value.is_number()) || (ref.is_string() && value.is_string()) ||
                    (ref.is_array() && value.is_array() &&
                     std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); }));
    if (!ok) throw ConfigError("configuration key '" + key + "' has the wrong type (expected like " + ref.dump() + ")");
    if (ref.is_number_integer() && !value.is_number_integer())
      throw ConfigError("configuration key '" + key + "' must be an integer");
    values_[key] = value;
  }

  void validate() const {
    const auto defaults = default_config_values();
    for (const auto& [key, value] : values_.items()) {
      if (key.find("tolerance") != std::string::npos && !(value.get<double>() > 0.0))
        throw ConfigError("tolerance '" + key + "' must be positive");
      if (defaults.at(key).is_number_integer() && key != "seed" && !(value.is_number_unsigned() ? value.get<std::uint64_t>() > 0 : value.get<std::int64_t>() > 0))
        throw ConfigError("'" + key + "' must be a positive integer");
    }
    const json& seed_value = values_.at("seed");
    if (!seed_value.is_number_unsigned() && seed_value.get<std::int64_t>() < 0) throw ConfigError("seed must be nonnegative");
    for (const char* key : {"mass", "spacing", "oracle.spacing", "localize.width", "localize.gate", "nw.packet_width",
                            "nw.leak_radius", "nw.leak_width", "elp.region_radius"})
      if (!(number(key) > 0.0)) throw ConfigError(std::string("'") + key + "' must be positive");
    for (const char* key : {"modulation", "kernel.slow_modulation"})
      if (!(std::abs(number(key)) < 1.0)) throw ConfigError(std::string(key) + " must lie in (-1, 1)");
    const auto op = text("operator");
    if (op != "klein-gordon" && op != "modulated") throw ConfigError("operator must be 'klein-gordon' or 'modulated'");
    if (numbers("kernel.window").size() != 2 || numbers("kernel.window")[0] >= numbers("kernel.window")[1])
      throw ConfigError("kernel.window must be [start, end] with start < end");
    if (numbers("oracle.modes").size() > 3 || numbers("oracle.modes").empty())
      throw ConfigError("oracle.modes must list one to three mode indices");
    for (double k : numbers("oracle.modes"))
      if (k < 0 || k != std::floor(k) || k >= number("oracle.sites"))
        throw ConfigError("oracle.modes entries must be mode indices below oracle.sites");
    for (const char* key : {"kernel.exponents", "modes.times", "oracle.lambdas", "asymptotics.lambdas", "asymptotics.radii"})
      if (numbers(key).empty()) throw ConfigError(std::string("'") + key + "' must not be empty");
  }

  const json& values() const { return values_; }
  double number(const std::string& key) const { return values_.at(key).get<double>(); }
  long integer(const std::string& key) const { return values_.at(key).get<long>(); }
  std::size_t count(const std::string& key) const { return values_.at(key).get<std::size_t>(); }
  std::string text(const std::string& key) const { return values_.at(key).get<std::string>(); }
  std::vector<double> numbers(const std::string& key) const { return values_.at(key).get<std::vector<double>>(); }
  std::uint64_t seed() const { return values_.at("seed").get<std::uint64_t>(); }
  void set_seed(std::uint64_t s) { values_["seed"] = s; }

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return a.values_ == b.values_; }

 private:
  json values_;
};

}  // namespace emergence::lab
