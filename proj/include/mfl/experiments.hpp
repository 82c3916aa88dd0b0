#pragma once

#include "mfl/config.hpp"
#include "mfl/output.hpp"

namespace mfl {

ExperimentReport run_partition(const ExperimentConfig& config);
ExperimentReport run_limit(const ExperimentConfig& config);
ExperimentReport run_cluster_verify(const ExperimentConfig& config);
ExperimentReport run_dynamics_check(const ExperimentConfig& config);
ExperimentReport run_theorem1(const ExperimentConfig& config);
ExperimentReport run_correlations_decay(const ExperimentConfig& config);
ExperimentReport run_vlasov_check(const ExperimentConfig& config);
ExperimentReport run_meanfield(const ExperimentConfig& config);

// Dispatches on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Fixed test-function panel for one-particle marginals: cos(2 pi x),
// sin(2 pi x), cos(2 pi x) v sqrt(beta), He_2(sqrt(beta) v).
std::vector<std::pair<std::string, Observable>> theorem1_panel(double beta);

enum ExitCode { exit_ok = 0, exit_numerical = 2, exit_config = 3 };

struct RunResult {
  ExperimentReport report;
  std::vector<EmittedFile> files;
  int exit_code = exit_ok;
};

// Validates, sets the worker count, runs, and emits outputs.
RunResult run_and_emit(const ExperimentConfig& config);

}  // namespace mfl
