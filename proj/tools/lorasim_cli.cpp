// lorasim: run scenarios and compare their summaries.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "lorasim/scenario/config.hpp"
#include "lorasim/scenario/presets.hpp"
#include "lorasim/scenario/simulation.hpp"
#include "lorasim/scenario/summary.hpp"

namespace {

using namespace lorasim;

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for a self-healing LoRa cluster"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string duration_text;
  bool quiet = false;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its outputs");
  simulate->add_option("--scenario", scenario_path, "YAML scenario file")->check(CLI::ExistingFile);
  simulate->add_option("--preset", preset_name, "Built-in scenario used as the base configuration");
  simulate->add_option("--seed", seed, "Seed (overrides the scenario)");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--duration", duration_text, "Simulated time, e.g. 24h or 90m (overrides the scenario)");
  simulate->add_flag("-q,--quiet", quiet, "Do not print the summary");

  std::string summary_a, summary_b;
  auto* compare = app.add_subcommand("compare", "Signed deltas (b - a) between two summary.json files");
  compare->add_option("summary_a", summary_a)->required()->check(CLI::ExistingFile);
  compare->add_option("summary_b", summary_b)->required()->check(CLI::ExistingFile);

  auto* presets = app.add_subcommand("presets", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  if (presets->parsed()) {
    for (const auto& n : scenario::preset_names()) std::cout << n << '\n';
    return 0;
  }

  if (compare->parsed()) {
    try {
      const auto a = scenario::summary_from_json(slurp(summary_a));
      const auto b = scenario::summary_from_json(slurp(summary_b));
      const auto report = scenario::compare_runs(a, b);
      std::cout << scenario::format_compare(a, b, report);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    }
  }

  scenario::ScenarioConfig config;
  try {
    if (scenario_path.empty() && preset_name.empty())
      throw scenario::ConfigError("simulate needs --scenario or --preset");
    std::optional<scenario::ScenarioConfig> base;
    if (!preset_name.empty()) {
      try {
        base = scenario::preset(preset_name);
      } catch (const std::out_of_range& e) {
        throw scenario::ConfigError(e.what());
      }
    }
    config = scenario_path.empty() ? *base : scenario::parse_scenario(scenario_path, base);
    if (seed) config.seed = *seed;
    if (!duration_text.empty()) {
      try {
        config.duration = parse_duration(duration_text);
      } catch (const std::invalid_argument& e) {
        throw scenario::ConfigError(std::string("--duration: ") + e.what());
      }
    }
    config.validate();
  } catch (const scenario::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const auto result = scenario::run_scenario(config);
    scenario::write_outputs(result, config.outputs, out_dir);
    if (!quiet) std::cout << scenario::format_summary(result.summary);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
