#pragma once

// Newtonian N-particle dynamics on T^d x R^d with mean-field scaling
//   dx_j/dt = v_j,  dv_j/dt = (1/N) sum_{l != j} K(x_j - x_l),
// velocity-Verlet integration, and importance-weighted Gibbs ensembles that
// carry the signed fluctuation density sum_j f0(z_j).

#include <cstdint>
#include <vector>

#include "mfl/gibbs.hpp"
#include "mfl/kernels.hpp"
#include "mfl/observable.hpp"
#include "mfl/stats.hpp"

namespace mfl {

struct ParticleState {
  int dimension = 1;
  std::vector<Point> positions;
  std::vector<Point> velocities;
  double time = 0.0;

  int size() const { return static_cast<int>(positions.size()); }
};

// Mean-field forces (1/N) sum_{l != j} K(x_j - x_l) from the kernel's
// structure factors, O(N * modes). Parallel over particles.
void compute_forces(const FourierKernel& kernel, const std::vector<Point>& positions,
                    std::vector<Point>& forces);

namespace serial {
// Same quantity by the direct pair sum, O(N^2).
void compute_forces_pairwise(const FourierKernel& kernel, const std::vector<Point>& positions,
                             std::vector<Point>& forces);
// Structure-factor forces without threading (used inside replica loops).
void compute_forces(const FourierKernel& kernel, const std::vector<Point>& positions,
                    std::vector<Point>& forces);
}  // namespace serial

// Velocity Verlet with a force cache: kick(dt/2), drift(dt), kick(dt/2).
class VerletIntegrator {
 public:
  VerletIntegrator(const FourierKernel& kernel, double dt, bool threaded = false);
  VerletIntegrator(FourierKernel&&, double, bool = false) = delete;

  void step(ParticleState& state);
  // Forces must be refreshed when the state was modified externally.
  void reset(const ParticleState& state);
  double dt() const { return dt_; }

 private:
  void forces(const std::vector<Point>& x);

  const FourierKernel* kernel_;
  double dt_;
  bool threaded_;
  std::vector<Point> force_;
  bool primed_ = false;
};

ParticleState verlet_step(ParticleState state, const FourierKernel& kernel, double dt);

// H = sum_j |v_j|^2 / 2 + (1/2N) sum_{i != j} W(x_i - x_j)
double total_energy(const ParticleState& state, const FourierKernel& kernel);

struct WeightedEnsemble {
  int n_particles = 0;
  int dimension = 1;
  double beta = 1.0;
  std::vector<ParticleState> replicas;
  std::vector<double> weights;
  std::vector<std::uint64_t> seeds;
};

struct EnsembleParams {
  int chains = 32;
  int burn_in_sweeps = 200;
  // sweeps of N single-particle proposals between retained samples
  int thin_sweeps = 10;

  bool operator==(const EnsembleParams&) const = default;
};

// Positions from thinned Gibbs chains, Maxwellian velocities, weights
// w_r = sum_j f0(z_j). Throws std::invalid_argument unless
// |int f0 M_beta| < 1e-8.
WeightedEnsemble make_fluctuation_ensemble(const FourierKernel& kernel, int n_particles,
                                           double beta, const Observable& f0, int replicas,
                                           const EnsembleParams& params, std::uint64_t seed);

struct Snapshots {
  std::vector<double> times;
  // states[t][r]
  std::vector<std::vector<ParticleState>> states;
  std::vector<double> weights;
  int n_particles = 0;
  int dimension = 1;
  double beta = 1.0;
};

// Integrates every replica to T and records the requested times, which must
// be multiples of dt in [0, T].
Snapshots simulate(const WeightedEnsemble& ensemble, const FourierKernel& kernel, double t_end,
                   double dt, const std::vector<double>& snapshot_times);

std::size_t snapshot_index(const Snapshots& snaps, double t);

// Per-replica products w_r * U_1(phi) with U_1 = (1/N) sum_j phi(z_j).
std::vector<double> replica_values(const Snapshots& snaps, std::size_t time_index,
                                   const Observable& phi);
// Per-replica w_r * U_2(psi (x) chi), the symmetrized U-statistic over
// ordered pairs of distinct particles.
std::vector<double> replica_values(const Snapshots& snaps, std::size_t time_index,
                                   const PairObservable& pair);

// Replica mean of the weighted U-statistic with batch-means standard error.
Estimate weighted_observable(const Snapshots& snaps, std::size_t time_index,
                             const Observable& phi);
Estimate weighted_observable(const Snapshots& snaps, std::size_t time_index,
                             const PairObservable& pair);

}  // namespace mfl
