#include "mfl/dynamics.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace mfl {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double phase(const KernelMode& m, const Point& x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += m.xi[i] * x[i];
  return two_pi * s;
}

std::vector<std::complex<double>> structure_factors(const FourierKernel& kernel,
                                                    const std::vector<Point>& x,
                                                    std::vector<std::complex<double>>& phases) {
  const auto modes = kernel.modes();
  const int d = kernel.dimension();
  const std::size_t n = x.size();
  phases.resize(modes.size() * n);
  std::vector<std::complex<double>> s(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      phases[m * n + j] = std::polar(1.0, phase(modes[m], x[j], d));
      acc += phases[m * n + j];
    }
    s[m] = acc;
  }
  return s;
}

// sum_{l} sin(theta_j - theta_l) = Im(e^{i theta_j} conj(S)); the l = j term
// is zero.
void forces_from_structure(const FourierKernel& kernel, std::size_t n,
                           const std::vector<std::complex<double>>& s,
                           const std::vector<std::complex<double>>& phases, std::size_t j,
                           Point& out) {
  const auto modes = kernel.modes();
  const int d = kernel.dimension();
  out = Point{0.0, 0.0, 0.0};
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double im = (phases[m * n + j] * std::conj(s[m])).imag();
    const double amp = 2.0 * two_pi * modes[m].coefficient * im / static_cast<double>(n);
    for (int a = 0; a < d; ++a) out[a] += amp * modes[m].xi[a];
  }
}

}  // namespace

void compute_forces(const FourierKernel& kernel, const std::vector<Point>& positions,
                    std::vector<Point>& forces) {
  std::vector<std::complex<double>> phases;
  const auto s = structure_factors(kernel, positions, phases);
  const std::size_t n = positions.size();
  forces.resize(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < count; ++j) forces_from_structure(kernel, n, s, phases, j, forces[j]);
}

namespace serial {

void compute_forces(const FourierKernel& kernel, const std::vector<Point>& positions,
                    std::vector<Point>& forces) {
  std::vector<std::complex<double>> phases;
  const auto s = structure_factors(kernel, positions, phases);
  const std::size_t n = positions.size();
  forces.resize(n);
  for (std::size_t j = 0; j < n; ++j) forces_from_structure(kernel, n, s, phases, j, forces[j]);
}

void compute_forces_pairwise(const FourierKernel& kernel, const std::vector<Point>& positions,
                             std::vector<Point>& forces) {
  const std::size_t n = positions.size();
  const int d = kernel.dimension();
  forces.assign(n, Point{0.0, 0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      if (l == j) continue;
      Point r{};
      for (int a = 0; a < d; ++a) r[a] = positions[j][a] - positions[l][a];
      const Point k = kernel.force(reduce_to_torus(r, d));
      for (int a = 0; a < d; ++a) forces[j][a] += k[a] / static_cast<double>(n);
    }
}

}  // namespace serial

VerletIntegrator::VerletIntegrator(const FourierKernel& kernel, double dt, bool threaded)
    : kernel_(&kernel), dt_(dt), threaded_(threaded) {
  if (!(dt > 0)) throw std::invalid_argument("VerletIntegrator: dt must be positive");
}

void VerletIntegrator::forces(const std::vector<Point>& x) {
  if (threaded_) compute_forces(*kernel_, x, force_);
  else serial::compute_forces(*kernel_, x, force_);
}

void VerletIntegrator::reset(const ParticleState& state) {
  forces(state.positions);
  primed_ = true;
}

void VerletIntegrator::step(ParticleState& state) {
  if (!primed_) reset(state);
  const int d = state.dimension;
  const std::size_t n = state.positions.size();
  const double half = 0.5 * dt_;
  for (std::size_t j = 0; j < n; ++j)
    for (int a = 0; a < d; ++a) state.velocities[j][a] += half * force_[j][a];
  for (std::size_t j = 0; j < n; ++j) {
    for (int a = 0; a < d; ++a) state.positions[j][a] += dt_ * state.velocities[j][a];
    state.positions[j] = reduce_to_torus(state.positions[j], d);
  }
  forces(state.positions);
  for (std::size_t j = 0; j < n; ++j)
    for (int a = 0; a < d; ++a) state.velocities[j][a] += half * force_[j][a];
  state.time += dt_;
}

ParticleState verlet_step(ParticleState state, const FourierKernel& kernel, double dt) {
  VerletIntegrator integrator(kernel, dt);
  integrator.step(state);
  return state;
}

double total_energy(const ParticleState& state, const FourierKernel& kernel) {
  std::vector<double> kinetic(state.positions.size());
  for (std::size_t j = 0; j < kinetic.size(); ++j) {
    double s = 0.0;
    for (int a = 0; a < state.dimension; ++a) s += state.velocities[j][a] * state.velocities[j][a];
    kinetic[j] = 0.5 * s;
  }
  return pairwise_sum(kinetic) + pair_energy(kernel, state.positions);
}

WeightedEnsemble make_fluctuation_ensemble(const FourierKernel& kernel, int n_particles,
                                           double beta, const Observable& f0, int replicas,
                                           const EnsembleParams& params, std::uint64_t seed) {
  const int d = kernel.dimension();
  const double mass = f0.maxwellian_average(beta, d);
  if (std::abs(mass) > 1e-8)
    throw std::invalid_argument("make_fluctuation_ensemble: f0 is not centered, int f0 M = " +
                                std::to_string(mass));
  if (replicas < 1 || n_particles < 1)
    throw std::invalid_argument("make_fluctuation_ensemble: need N >= 1 and R >= 1");

  WeightedEnsemble e;
  e.n_particles = n_particles;
  e.dimension = d;
  e.beta = beta;
  e.replicas.resize(replicas);
  e.weights.resize(replicas);
  e.seeds.resize(replicas);

  const std::uint64_t chain_stage = item_seed(seed, 0);
  const std::uint64_t velocity_stage = item_seed(seed, 1);
  const int chains = std::max(1, std::min(params.chains, replicas));
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < chains; ++c) {
    GibbsChain chain(kernel, n_particles, beta, item_seed(chain_stage, c));
    chain.adapt(params.burn_in_sweeps, 0.3);
    for (int r = c; r < replicas; r += chains) {
      for (int s = 0; s < params.thin_sweeps; ++s) chain.sweep();
      ParticleState st;
      st.dimension = d;
      st.positions = chain.config().positions();
      e.seeds[r] = item_seed(velocity_stage, r);
      st.velocities = sample_velocities(n_particles, d, beta, e.seeds[r]);
      std::vector<double> terms(n_particles);
      for (int j = 0; j < n_particles; ++j) terms[j] = f0(st.positions[j], st.velocities[j]);
      e.weights[r] = pairwise_sum(terms);
      e.replicas[r] = std::move(st);
    }
  }
  return e;
}

Snapshots simulate(const WeightedEnsemble& ensemble, const FourierKernel& kernel, double t_end,
                   double dt, const std::vector<double>& snapshot_times) {
  if (!(dt > 0) || t_end < 0) throw std::invalid_argument("simulate: need dt > 0 and T >= 0");
  const long n_steps = std::lround(t_end / dt);
  std::vector<long> snap_steps;
  for (double t : snapshot_times) {
    const long s = std::lround(t / dt);
    if (t < 0 || s > n_steps || std::abs(s * dt - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("simulate: snapshot times must be multiples of dt in [0, T]");
    snap_steps.push_back(s);
  }
  Snapshots out;
  out.times = snapshot_times;
  out.weights = ensemble.weights;
  out.n_particles = ensemble.n_particles;
  out.dimension = ensemble.dimension;
  out.beta = ensemble.beta;
  const std::size_t n_rep = ensemble.replicas.size();
  out.states.assign(snapshot_times.size(), std::vector<ParticleState>(n_rep));
  const auto count = static_cast<std::ptrdiff_t>(n_rep);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    ParticleState st = ensemble.replicas[r];
    VerletIntegrator integrator(kernel, dt);
    for (long step = 0; step <= n_steps; ++step) {
      for (std::size_t k = 0; k < snap_steps.size(); ++k)
        if (snap_steps[k] == step) out.states[k][r] = st;
      if (step < n_steps) integrator.step(st);
    }
  }
  return out;
}

std::size_t snapshot_index(const Snapshots& snaps, double t) {
  for (std::size_t i = 0; i < snaps.times.size(); ++i)
    if (std::abs(snaps.times[i] - t) < 1e-9) return i;
  throw std::out_of_range("snapshot_index: time not recorded");
}

std::vector<double> replica_values(const Snapshots& snaps, std::size_t time_index,
                                   const Observable& phi) {
  const auto& states = snaps.states.at(time_index);
  std::vector<double> out(states.size());
  if (phi.is_zero()) return out;
  const auto count = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const auto& st = states[r];
    std::vector<double> v(st.size());
    for (int j = 0; j < st.size(); ++j) v[j] = phi(st.positions[j], st.velocities[j]);
    out[r] = snaps.weights[r] * pairwise_sum(v) / st.size();
  }
  return out;
}

std::vector<double> replica_values(const Snapshots& snaps, std::size_t time_index,
                                   const PairObservable& pair) {
  const auto& states = snaps.states.at(time_index);
  std::vector<double> out(states.size());
  if (snaps.n_particles < 2) throw std::invalid_argument("pair U-statistic needs N >= 2");
  const auto count = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const auto& st = states[r];
    const int n = st.size();
    std::vector<double> a(n), b(n), ab(n);
    for (int j = 0; j < n; ++j) {
      a[j] = pair.psi(st.positions[j], st.velocities[j]);
      b[j] = pair.chi(st.positions[j], st.velocities[j]);
      ab[j] = a[j] * b[j];
    }
    // sum_{i != j} psi(z_i) chi(z_j) = (sum psi)(sum chi) - sum psi chi
    const double u2 = (pairwise_sum(a) * pairwise_sum(b) - pairwise_sum(ab)) /
                      (static_cast<double>(n) * (n - 1));
    out[r] = snaps.weights[r] * u2;
  }
  return out;
}

Estimate weighted_observable(const Snapshots& snaps, std::size_t time_index,
                             const Observable& phi) {
  return batch_means(replica_values(snaps, time_index, phi));
}

Estimate weighted_observable(const Snapshots& snaps, std::size_t time_index,
                             const PairObservable& pair) {
  return batch_means(replica_values(snaps, time_index, pair));
}

}  // namespace mfl
