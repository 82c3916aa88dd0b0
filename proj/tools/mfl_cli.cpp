// mfl <experiment> --config path [--seed n] [--out dir] [--workers k]
//
// Exit codes: 0 all checks passed, 2 a numerical check failed, 3 the
// configuration is invalid.

#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "mfl/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mean-field fluctuation experiments"};
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  int workers = -1;
  bool print_config = false;
  app.add_option("experiment", experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(mfl::experiment_names()));
  app.add_option("--config", config_path, "INI configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--workers", workers, "OpenMP threads, 0 = runtime default")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mfl::exit_config;
  }

  mfl::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = mfl::load_config(config_path);
    config.experiment = experiment;
    if (*seed_opt) config.seed = seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (workers >= 0) config.workers = workers;
    mfl::validate(config);
  } catch (const mfl::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return mfl::exit_config;
  }
  if (print_config) {
    std::cout << mfl::serialize_config(config);
    return 0;
  }

  try {
    const auto result = mfl::run_and_emit(config);
    for (const auto& c : result.report.checks)
      std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    for (const auto& f : result.files) std::printf("wrote %s\n", f.name.c_str());
    return result.exit_code;
  } catch (const mfl::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return mfl::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mfl::exit_numerical;
  }
}
