#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "emergence/lab/experiments.hpp"

namespace {

enum Exit : int { pass = 0, check_failure = 1, usage = 2, numeric = 3, invalid_config = 4 };

std::string experiment_list() {
  std::string s;
  for (const auto& n : emergence::lab::experiment_names()) s += n + " | ";
  return s + "all";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace emergence;
  CLI::App app{"Lattice experiments on the emergence of particles from free quantum fields"};
  app.usage("emergence-lab <experiment> [--config <path>] [--out <dir>] [--seed <n>]");
  std::string experiment;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool dump_config = false;
  app.add_option("experiment", experiment, "Experiment: " + experiment_list());
  app.add_option("--config", config_path, "JSON object of flat configuration keys (see README)");
  app.add_option("--out", out_dir, "Directory for report.<run>.json and .tsv tables");
  app.add_option("--seed", seed, "Seed for all random draws (overrides the config)");
  app.add_flag("--dump-config", dump_config, "Print the effective configuration and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  lab::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = lab::ExperimentConfig::load(config_path);
    if (seed) cfg.set_seed(*seed);
  } catch (const Error& e) {
    std::cerr << "emergence-lab: invalid configuration: " << e.what() << "\n";
    return invalid_config;
  }
  if (dump_config) {
    std::cout << cfg.values().dump(2) << "\n";
    return pass;
  }
  if (experiment.empty() || !lab::is_experiment(experiment)) {
    std::cerr << "emergence-lab: " << (experiment.empty() ? "missing experiment" : "unknown experiment '" + experiment + "'")
              << "\nexperiments: " << experiment_list() << "\n"
              << app.help();
    return usage;
  }

  try {
    auto clock = std::chrono::steady_clock::now();
    const auto report = lab::run(experiment, cfg, [&](const lab::Section& s) {
      const auto now = std::chrono::steady_clock::now();
      const double secs = std::chrono::duration<double>(now - clock).count();
      clock = now;
      std::size_t passed = 0;
      for (const auto& c : s.checks) passed += c.pass;
      std::printf("%-15s %s  %zu/%zu checks  %.2f s\n", s.experiment.c_str(), s.pass() ? "PASS" : "FAIL", passed,
                  s.checks.size(), secs);
      for (const auto& c : s.checks)
        if (!c.pass) std::printf("    failed: %s (measured %s)\n", c.name.c_str(), lab::format_number(c.measured).c_str());
    });
    const auto path = lab::write_outputs(out_dir, report);
    std::printf("report: %s\nstatus: %s\n", path.string().c_str(), report.pass() ? "pass" : "fail");
    return report.pass() ? pass : check_failure;
  } catch (const lab::ConfigError& e) {
    std::cerr << "emergence-lab: invalid configuration: " << e.what() << "\n";
    return invalid_config;
  } catch (const InvalidArgument& e) {
    std::cerr << "emergence-lab: configuration rejected by the experiment: " << e.what() << "\n";
    return invalid_config;
  } catch (const std::exception& e) {
    std::cerr << "emergence-lab: numerical error: " << e.what() << "\n";
    return numeric;
  }
}
