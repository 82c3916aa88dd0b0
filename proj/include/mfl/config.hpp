#pragma once

// Experiment configuration: INI text with sections [run], [kernel],
// [physics], [numerics], [mcmc], [ensemble], [vlasov], [meanfield].
// Every key is optional and falls back to the defaults below; unknown
// sections or keys are rejected. See configs/ for examples.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfl/dynamics.hpp"
#include "mfl/gibbs.hpp"
#include "mfl/kernels.hpp"
#include "mfl/meanfield.hpp"
#include "mfl/observable.hpp"

namespace mfl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "partition",   "limit",         "cluster-verify",     "dynamics-check",
      "theorem1",    "correlations-decay", "vlasov-check", "meanfield"};
  return names;
}

struct KernelConfig {
  // cosine | riesz | log | table
  std::string family = "cosine";
  int dimension = 1;
  double amplitude = 1.0;
  double s = 0.5;
  int cutoff = 1;
  // "xi:value" entries separated by spaces, xi components by commas
  std::string table;

  bool operator==(const KernelConfig&) const = default;
};

struct ExperimentConfig {
  // [run]
  std::string experiment = "partition";
  std::string run_id = "run";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 0;

  KernelConfig kernel;

  // [physics]
  std::vector<int> n_list{2, 8, 64};
  double beta = 1.0;
  std::vector<double> betas;
  double t_end = 2.0;
  double dt = 1e-3;
  int replicas = 10000;
  std::string f0 = "cos(1)";
  std::vector<double> times{0.5, 1.0, 2.0};
  std::string psi = "cos(1)";
  std::string chi = "cos(2)";

  // [numerics]
  int grid = 4096;
  int lambda_nodes = 8;
  double bound_constant = 1.0;
  int cluster_trials = 100;
  std::vector<int> riesz_cutoffs;
  int bootstrap = 256;

  McmcParams mcmc;
  EnsembleParams ensemble;

  // [vlasov]
  int k_modes = 1;
  int n_hermite = 512;
  int n_hermite_free = 128;
  bool filter = false;
  double vlasov_t_end = 5.0;

  // [meanfield]
  ConfinedProblem meanfield;
  double tol = 1e-12;
  int max_iter = 500;
  double q = 2.0;
  std::vector<double> eta_betas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError on syntax errors, unknown keys or invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

FourierKernel build_kernel(const KernelConfig& k);
Observable build_observable(const std::string& text, double beta);

}  // namespace mfl
