// kinksim: command-line front end for the kink dynamics toolkit.
//
//   kinksim simulate <scenario> [--config <path>] [--out <dir>] [--seed N]
//   kinksim analyze --in <trace.csv> --out <metrics.csv>
//   kinksim defaults <scenario>
//
// Exit codes: 0 ok, 2 config error, 3 numerical-invariant violation,
// 4 I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "kinklab/scenario.hpp"

namespace {

int run_simulate(const std::string& scenario_name, const std::string& config_path,
                 const std::string& out_dir, bool seed_given, std::uint64_t seed) {
  const kinklab::Scenario scenario = kinklab::parse_scenario(scenario_name);
  kinklab::ScenarioConfig cfg = kinklab::default_config(scenario);
  if (!config_path.empty()) cfg = kinklab::config_io::load(config_path, cfg);
  cfg.scenario = scenario;
  if (!out_dir.empty()) cfg.directory = out_dir;
  if (seed_given) cfg.seed = seed;

  const kinklab::ScenarioReport report = kinklab::run_scenario(cfg);
  std::cout << "scenario = " << scenario_name << "\n";
  if (!report.trace_csv.empty()) std::cout << "trace = " << report.trace_csv.string() << "\n";
  if (!report.oracle_csv.empty()) std::cout << "oracle = " << report.oracle_csv.string() << "\n";
  if (!report.metrics_csv.empty()) std::cout << "metrics = " << report.metrics_csv.string() << "\n";
  for (const auto& [key, value] : report.metrics)
    std::cout << key << " = " << kinklab::format_double(value) << "\n";
  for (const auto& [key, value] : report.expectations)
    std::cout << key << " = " << kinklab::format_double(value) << "\n";
  return 0;
}

int run_analyze(const std::string& in_path, const std::string& out_path) {
  const auto metrics = kinklab::analyze_file(in_path, out_path);
  for (const auto& [key, value] : metrics)
    std::cout << key << " = " << kinklab::format_double(value) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinksim: kink dynamics in a transverse-field Ising chain"};
  app.require_subcommand(1);

  std::string scenario_name, config_path, out_dir, in_path, out_path;
  std::uint64_t seed = 0;

  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario and write CSV outputs");
  simulate->add_option("scenario", scenario_name,
                       "double-slit | decoherence | self-interference | ghz-demo | oracle-validation")
      ->required();
  simulate->add_option("--config", config_path, "INI-style configuration file");
  simulate->add_option("--out", out_dir, "output directory (overrides [output] directory)");
  CLI::Option* seed_opt = simulate->add_option("--seed", seed, "seed recorded with the run");

  CLI::App* analyze = app.add_subcommand("analyze", "recompute metrics from a trace CSV");
  analyze->add_option("--in", in_path, "trace CSV")->required();
  analyze->add_option("--out", out_path, "metrics CSV to write")->required();

  CLI::App* defaults = app.add_subcommand("defaults", "print the built-in default configuration");
  defaults->add_option("scenario", scenario_name, "scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed())
      return run_simulate(scenario_name, config_path, out_dir, seed_opt->count() > 0, seed);
    if (analyze->parsed()) return run_analyze(in_path, out_path);
    if (defaults->parsed()) {
      std::cout << kinklab::config_io::dump(
          kinklab::default_config(kinklab::parse_scenario(scenario_name)));
      return 0;
    }
  } catch (const kinklab::ConfigError& e) {
    std::cerr << "error,config," << e.what() << "\n";
    return 2;
  } catch (const kinklab::NumericalError& e) {
    std::cerr << "error,numerical," << e.what() << "\n";
    return 3;
  } catch (const kinklab::IoError& e) {
    std::cerr << "error,io," << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error,internal," << e.what() << "\n";
    return 1;
  }
  return 0;
}
