#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "emergence/lab/experiments.hpp"

namespace {

using namespace emergence;
using namespace emergence::lab;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(EMERGENCE_LAB_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("emergence_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Config, RoundTripsThroughText) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto cfg = ExperimentConfig::from_json(json{{"mass", u(rng)},
                                                {"kernel.tolerance", u(rng) * 1e-3},
                                                {"asymptotics.radii", {u(rng), u(rng)}},
                                                {"operator", trial % 2 ? "modulated" : "klein-gordon"}});
    cfg.set_seed(rng());
    const auto back = ExperimentConfig::from_json(json::parse(cfg.values().dump()));
    EXPECT_EQ(back, cfg);
    EXPECT_EQ(back.seed(), cfg.seed());
  }
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_THROW(ExperimentConfig::from_json(json{{"nosuch", 1}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"mass", "heavy"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"sites", 2.5}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"sites", 0}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"kernel.tolerance", -1.0}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"oracle.modes", {0, 1, 2, 3}}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"operator", "lorentz"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"modulation", 1.5}}), ConfigError);
  EXPECT_NO_THROW(ExperimentConfig::from_json(json{{"modulation", 0}}));
  EXPECT_THROW(ExperimentConfig::from_json(json::array()), ConfigError);
}

TEST(Tables, HeaderOnlyWhenEmptyAndRowWidthChecked) {
  const ExperimentConfig cfg;
  Table t{"kernel_profile", {"distance", "value", "log_value"}, {}};
  const auto text = render_table(t, "kernel", cfg);
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.back(), "distance\tvalue\tlog_value");
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) EXPECT_EQ(lines[i][0], '#');
  EXPECT_NE(text.find("\"kappa\":0.5"), std::string::npos);
  EXPECT_THROW(t.add({1.0, 2.0}), InvalidArgument);
  t.add({1.0, 0.5, std::log(0.5)});
  EXPECT_EQ(render_table(t, "kernel", cfg), render_table(t, "kernel", cfg));
}

TEST(Tables, NumbersRoundTrip) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Run, ModesCheckPassesAndReportIsDeterministic) {
  const auto cfg = ExperimentConfig::from_json(json{{"modes.sites", 16}, {"mass", 1.0}});
  const auto a = run("modes-check", cfg);
  const auto b = run("modes-check", cfg);
  EXPECT_TRUE(a.pass());
  ASSERT_EQ(a.sections.size(), 1u);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.run_id, "modes-check-seed12345");
  EXPECT_THROW(run("nonsense", cfg), InvalidArgument);
}

TEST(Run, OverallPassIffAllChecksPass) {
  RunReport r{"x", "x", ExperimentConfig{}, {}};
  EXPECT_FALSE(r.pass());
  r.sections.push_back(Section{"a", {check_below("ok", 0.0, 1.0)}, json::object(), {}});
  EXPECT_TRUE(r.pass());
  r.sections.push_back(Section{"b", {check_below("bad", 2.0, 1.0)}, json::object(), {}});
  EXPECT_FALSE(r.pass());
}

TEST(Binary, ExitCodes) {
  const auto dir = fresh_dir("exit");
  EXPECT_EQ(run_cli("bogus-experiment"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("kernel --no-such-flag"), 2);
  std::ofstream(dir / "bad.json") << R"({"mass": -1})";
  EXPECT_EQ(run_cli("kernel --config " + (dir / "bad.json").string()), 4);
  std::ofstream(dir / "axiom.json") << R"({"asymptotics.symbol": [-1, 1]})";
  EXPECT_EQ(run_cli("asymptotics --config " + (dir / "axiom.json").string() + " --out " + dir.string()), 3);
  EXPECT_EQ(run_cli("modes-check --out " + dir.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.modes-check-seed12345.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "modes_spectrum.tsv"));
}

TEST(Binary, SameSeedGivesByteIdenticalOutputs) {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  ASSERT_EQ(run_cli("kernel --seed 99 --out " + a.string()), 0);
  ASSERT_EQ(run_cli("kernel --seed 99 --out " + b.string()), 0);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
    ++files;
  }
  EXPECT_GE(files, 2u);
  EXPECT_TRUE(std::filesystem::exists(a / "report.kernel-seed99.json"));
}

}  // namespace
