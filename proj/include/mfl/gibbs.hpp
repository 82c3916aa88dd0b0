#pragma once

// Spatial Gibbs measure exp(-(beta/2N) sum_{i!=j} W(x_i - x_j)) on (T^d)^N:
// Metropolis sampling, partition-function estimators and the associated
// closed-form limit and bound evaluators.

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfl/kernels.hpp"
#include "mfl/rng.hpp"

namespace mfl {

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// N positions with cached structure factors S_m = sum_j exp(2 pi i xi_m.x_j)
// over the kernel's half-lattice modes. The interaction energy
//   U = (1/2N) sum_{i != j} W(x_i - x_j) = (1/N) sum_m What_m |S_m|^2 - W(0)/2
// is maintained incrementally.
class SpatialConfig {
 public:
  SpatialConfig(const FourierKernel& kernel, std::vector<Point> positions);
  // The kernel is held by reference.
  SpatialConfig(FourierKernel&&, std::vector<Point>) = delete;

  const std::vector<Point>& positions() const { return positions_; }
  int size() const { return static_cast<int>(positions_.size()); }
  double energy() const { return energy_; }

  // Energy change if particle j moved to `to`; also returns the per-mode
  // structure-factor increments through `delta`.
  double energy_change(int j, const Point& to, std::vector<std::complex<double>>& delta) const;
  void apply_move(int j, const Point& to, const std::vector<std::complex<double>>& delta,
                  double d_energy);

  // Rebuilds structure factors and energy from scratch.
  void refresh();

 private:
  const FourierKernel* kernel_;
  std::vector<Point> positions_;
  std::vector<std::complex<double>> structure_;
  double energy_ = 0.0;
};

// Direct O(N^2) evaluation of (1/2N) sum_{i != j} W(x_i - x_j).
double pair_energy(const FourierKernel& kernel, const std::vector<Point>& positions);

struct McmcParams {
  int burn_in_sweeps = 500;
  int sample_sweeps = 20000;
  int thin_sweeps = 1;
  double initial_step = 0.25;
  double target_acceptance = 0.3;
  int n_batches = 32;

  bool operator==(const McmcParams&) const = default;
};

class GibbsChain {
 public:
  // Positions start uniform on the torus.
  GibbsChain(const FourierKernel& kernel, int n_particles, double beta, std::uint64_t seed,
             double step_size = 0.25);
  GibbsChain(FourierKernel&&, int, double, std::uint64_t, double = 0.25) = delete;

  // One single-particle random-walk Metropolis proposal.
  void step();
  // N proposals.
  void sweep();
  // Robbins-Monro adaptation of log(step size) toward the target acceptance,
  // run for the given number of sweeps. Counters are reset afterwards so
  // acceptance_rate() reflects the frozen chain.
  void adapt(int sweeps, double target_acceptance);

  const SpatialConfig& config() const { return config_; }
  double beta() const { return beta_; }
  double step_size() const { return step_; }
  std::int64_t accepted() const { return accept_count_; }
  std::int64_t proposed() const { return total_count_; }
  double acceptance_rate() const;

 private:
  bool propose();

  const FourierKernel* kernel_;
  double beta_;
  double step_;
  Engine rng_;
  SpatialConfig config_;
  std::vector<std::complex<double>> scratch_;
  std::int64_t accept_count_ = 0;
  std::int64_t total_count_ = 0;
  std::int64_t since_refresh_ = 0;
};

// i.i.d. centered Gaussian velocities with variance 1/beta per component.
std::vector<Point> sample_velocities(int n, int dimension, double beta, std::uint64_t seed);

struct EnergyEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double acceptance = 0.0;
};

// Batch-means MCMC estimate of <U> under the spatial Gibbs measure. Throws
// NonConvergence when the first and second halves of the run disagree by
// more than 5 combined standard errors.
EnergyEstimate mean_energy(const FourierKernel& kernel, int n_particles, double beta,
                           const McmcParams& params, std::uint64_t seed);

enum class PartitionMethod { thermo_integration, exact_quadrature };

struct PartitionEstimate {
  double log_z = 0.0;
  double stderr_ = 0.0;
  PartitionMethod method = PartitionMethod::exact_quadrature;
  std::vector<double> lambda_grid;

  double z() const;
};

// log Zbar = -int_0^beta <U>_lambda d lambda with Gauss-Legendre nodes.
PartitionEstimate estimate_log_z_thermo(const FourierKernel& kernel, int n_particles,
                                        double beta, int n_lambda, const McmcParams& params,
                                        std::uint64_t seed);

// Periodic trapezoid quadrature of the defining integral, d = 1, N in {2,3}.
PartitionEstimate exact_z_small_n(const FourierKernel& kernel, int n_particles, double beta,
                                  int grid_size = 1 << 12);

namespace serial {
PartitionEstimate exact_z_small_n(const FourierKernel& kernel, int n_particles, double beta,
                                  int grid_size);
}

enum class LimitConvention {
  // sum_{xi != 0} (beta/2 What - log(1 + beta/2 What)), the formula as
  // commonly printed.
  as_published,
  // (1/2) sum_{xi != 0} (beta What - log(1 + beta What)), the limit obtained
  // from Gaussian fluctuations of the empirical Fourier modes.
  gaussian_fluctuation,
};

struct LimitZ {
  double value = 1.0;
  double exponent = 0.0;
  // Second-order estimate of the exponent contribution of |xi|_inf > cutoff
  // for the riesz and log families; zero for tables, +inf when divergent.
  double tail_estimate = 0.0;
};

// Throws std::domain_error when some 1 + c*beta*What(xi) <= 0.
LimitZ limit_z(const FourierKernel& kernel, double beta,
               LimitConvention convention = LimitConvention::as_published);

struct MomentIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
};

// int |Mbar_{N,beta}|^p over (T)^N against Zbar_{N,p beta} / Zbar_{N,beta}^p.
// Velocity factors cancel exactly and are not integrated.
MomentIdentity moment_identity_check(const FourierKernel& kernel, int n_particles, double beta,
                                     double p, int grid_size = 1 << 10);

// exp(beta N ||U_-||_1 exp(beta ||U_-||_inf)) for the kernel (as U).
double naive_bound(const FourierKernel& kernel, int n_particles, double beta,
                   int grid_size = 0);
// Same bound from samples of an arbitrary even function U on a uniform grid.
double naive_bound_from_samples(const std::vector<double>& u, int n_particles, double beta);

enum class RieszRegime { subcritical, critical, supercritical };

std::string to_string(RieszRegime r);

struct TheoreticalBounds {
  double bound_l2 = 0.0;
  double bound_weak_l2 = 0.0;
  std::optional<double> bound_riesz;
  std::optional<RieszRegime> regime;
};

TheoreticalBounds theoretical_bounds(const FourierKernel& kernel, int n_particles, double beta,
                                     double c, int grid_size = 0);

}  // namespace mfl
