#include "mfl/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mfl/quadrature.hpp"
#include "mfl/stats.hpp"

namespace mfl {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::complex<double> mode_phase(const KernelMode& m, const Point& x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += m.xi[i] * x[i];
  return std::polar(1.0, two_pi * s);
}

void require_small_n_1d(const FourierKernel& kernel, int n_particles) {
  if (kernel.dimension() != 1)
    throw std::invalid_argument("exact partition quadrature requires d = 1");
  if (n_particles < 2 || n_particles > 3)
    throw std::invalid_argument("exact partition quadrature supports N in {2, 3} only");
}

}  // namespace

SpatialConfig::SpatialConfig(const FourierKernel& kernel, std::vector<Point> positions)
    : kernel_(&kernel), positions_(std::move(positions)) {
  for (auto& x : positions_) x = reduce_to_torus(x, kernel.dimension());
  refresh();
}

void SpatialConfig::refresh() {
  const auto modes = kernel_->modes();
  const int d = kernel_->dimension();
  structure_.assign(modes.size(), {0.0, 0.0});
  for (std::size_t m = 0; m < modes.size(); ++m)
    for (const auto& x : positions_) structure_[m] += mode_phase(modes[m], x, d);
  const double n = static_cast<double>(positions_.size());
  double e = 0.0;
  for (std::size_t m = 0; m < modes.size(); ++m)
    e += modes[m].coefficient * (std::norm(structure_[m]) - n);
  energy_ = n > 0 ? e / n : 0.0;
}

double SpatialConfig::energy_change(int j, const Point& to,
                                    std::vector<std::complex<double>>& delta) const {
  const auto modes = kernel_->modes();
  const int d = kernel_->dimension();
  delta.resize(modes.size());
  double de = 0.0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    delta[m] = mode_phase(modes[m], to, d) - mode_phase(modes[m], positions_[j], d);
    de += modes[m].coefficient *
          (2.0 * (std::conj(structure_[m]) * delta[m]).real() + std::norm(delta[m]));
  }
  return de / static_cast<double>(positions_.size());
}

void SpatialConfig::apply_move(int j, const Point& to,
                               const std::vector<std::complex<double>>& delta, double d_energy) {
  positions_[j] = to;
  for (std::size_t m = 0; m < structure_.size(); ++m) structure_[m] += delta[m];
  energy_ += d_energy;
}

double pair_energy(const FourierKernel& kernel, const std::vector<Point>& positions) {
  const int n = static_cast<int>(positions.size());
  const int d = kernel.dimension();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Point r{};
      for (int a = 0; a < d; ++a) r[a] = positions[i][a] - positions[j][a];
      s += kernel.potential(reduce_to_torus(r, d));
    }
  return n > 0 ? s / n : 0.0;
}

GibbsChain::GibbsChain(const FourierKernel& kernel, int n_particles, double beta,
                       std::uint64_t seed, double step_size)
    : kernel_(&kernel),
      beta_(beta),
      step_(std::clamp(step_size, 1e-4, 0.5)),
      rng_(seed),
      config_(kernel, [&] {
        Engine init(splitmix64(seed));
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        std::vector<Point> xs(n_particles, Point{0.0, 0.0, 0.0});
        for (auto& x : xs)
          for (int a = 0; a < kernel.dimension(); ++a) x[a] = u(init);
        return xs;
      }()) {
  if (n_particles < 1) throw std::invalid_argument("GibbsChain: need at least one particle");
  if (beta < 0) throw std::invalid_argument("GibbsChain: beta must be nonnegative");
}

bool GibbsChain::propose() {
  const int n = config_.size();
  const int d = kernel_->dimension();
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> accept(0.0, 1.0);
  const int j = pick(rng_);
  Point to = config_.positions()[j];
  for (int a = 0; a < d; ++a) to[a] += step_ * u(rng_);
  to = reduce_to_torus(to, d);
  const double de = config_.energy_change(j, to, scratch_);
  ++total_count_;
  const bool ok = accept(rng_) < std::exp(-beta_ * de);
  if (ok) {
    config_.apply_move(j, to, scratch_, de);
    ++accept_count_;
    if (++since_refresh_ >= 64L * n) {
      config_.refresh();
      since_refresh_ = 0;
    }
  }
  return ok;
}

void GibbsChain::step() { propose(); }

void GibbsChain::sweep() {
  for (int i = 0; i < config_.size(); ++i) propose();
}

void GibbsChain::adapt(int sweeps, double target_acceptance) {
  double log_step = std::log(step_);
  for (int s = 0; s < sweeps; ++s) {
    int acc = 0;
    for (int i = 0; i < config_.size(); ++i) acc += propose() ? 1 : 0;
    const double rate = static_cast<double>(acc) / config_.size();
    log_step += (rate - target_acceptance) / std::pow(s + 1.0, 0.6);
    log_step = std::clamp(log_step, std::log(1e-4), std::log(0.5));
    step_ = std::exp(log_step);
  }
  accept_count_ = 0;
  total_count_ = 0;
}

double GibbsChain::acceptance_rate() const {
  return total_count_ ? static_cast<double>(accept_count_) / total_count_ : 0.0;
}

std::vector<Point> sample_velocities(int n, int dimension, double beta, std::uint64_t seed) {
  if (!(beta > 0)) throw std::invalid_argument("sample_velocities: beta must be positive");
  Engine rng(seed);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(beta));
  std::vector<Point> v(n, Point{0.0, 0.0, 0.0});
  for (auto& p : v)
    for (int a = 0; a < dimension; ++a) p[a] = g(rng);
  return v;
}

EnergyEstimate mean_energy(const FourierKernel& kernel, int n_particles, double beta,
                           const McmcParams& params, std::uint64_t seed) {
  GibbsChain chain(kernel, n_particles, beta, seed, params.initial_step);
  chain.adapt(params.burn_in_sweeps, params.target_acceptance);
  std::vector<double> samples;
  samples.reserve(params.sample_sweeps / std::max(1, params.thin_sweeps) + 1);
  for (int s = 1; s <= params.sample_sweeps; ++s) {
    chain.sweep();
    if (s % std::max(1, params.thin_sweeps) == 0) samples.push_back(chain.config().energy());
  }
  EnergyEstimate out;
  const auto all = batch_means(samples, params.n_batches);
  out.mean = all.value;
  out.stderr_ = all.stderr_;
  out.acceptance = chain.acceptance_rate();

  const std::size_t half = samples.size() / 2;
  if (half >= 2 * static_cast<std::size_t>(params.n_batches)) {
    const std::span<const double> s(samples);
    const auto a = batch_means(s.first(half), params.n_batches / 2);
    const auto b = batch_means(s.subspan(half), params.n_batches / 2);
    const double se = std::hypot(a.stderr_, b.stderr_);
    if (se > 0 && std::abs(a.value - b.value) > 5.0 * se)
      throw NonConvergence("mean_energy: first and second half of the chain disagree (" +
                           std::to_string(a.value) + " vs " + std::to_string(b.value) + ")");
  }
  return out;
}

double PartitionEstimate::z() const { return std::exp(log_z); }

PartitionEstimate estimate_log_z_thermo(const FourierKernel& kernel, int n_particles,
                                        double beta, int n_lambda, const McmcParams& params,
                                        std::uint64_t seed) {
  if (n_lambda < 4) throw std::invalid_argument("thermodynamic integration needs n_lambda >= 4");
  PartitionEstimate out;
  out.method = PartitionMethod::thermo_integration;
  if (beta == 0.0) return out;
  const auto rule = gauss_legendre(n_lambda, 0.0, beta);
  out.lambda_grid = rule.nodes;
  std::vector<EnergyEstimate> nodes(n_lambda);
  std::vector<std::string> failures(n_lambda);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_lambda; ++i) {
    try {
      nodes[i] = mean_energy(kernel, n_particles, rule.nodes[i], params, item_seed(seed, i));
    } catch (const NonConvergence& e) {
      failures[i] = e.what();
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw NonConvergence(f);
  double var = 0.0;
  for (int i = 0; i < n_lambda; ++i) {
    out.log_z -= rule.weights[i] * nodes[i].mean;
    var += rule.weights[i] * rule.weights[i] * nodes[i].stderr_ * nodes[i].stderr_;
  }
  out.stderr_ = std::sqrt(var);
  return out;
}

namespace {

// log of (1/n^{N-1}) sum exp(-a_i), stable in the exponent.
template <class Fn>
double log_mean_exp_over_grid(int n, int n_particles, Fn&& exponent, bool parallel) {
  if (n_particles == 2) {
    std::vector<double> e(n);
    for (int a = 0; a < n; ++a) e[a] = exponent(a, 0);
    const double shift = *std::min_element(e.begin(), e.end());
    std::vector<double> v(n);
    for (int a = 0; a < n; ++a) v[a] = std::exp(-(e[a] - shift));
    return std::log(pairwise_sum(v) / n) - shift;
  }
  std::vector<double> e(static_cast<std::size_t>(n) * n);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) e[static_cast<std::size_t>(a) * n + b] = exponent(a, b);
  } else {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) e[static_cast<std::size_t>(a) * n + b] = exponent(a, b);
  }
  const double shift = *std::min_element(e.begin(), e.end());
  for (auto& x : e) x = std::exp(-(x - shift));
  return std::log(pairwise_sum(e) / (static_cast<double>(n) * n)) - shift;
}

PartitionEstimate exact_z_impl(const FourierKernel& kernel, int n_particles, double beta,
                               int grid_size, bool parallel) {
  require_small_n_1d(kernel, n_particles);
  PartitionEstimate out;
  out.method = PartitionMethod::exact_quadrature;
  if (beta == 0.0) return out;
  const int n = grid_size;
  const auto w = parallel ? kernel.sample_grid(n) : serial::sample_grid(kernel, n);
  // (beta/2N) sum_{i != j} W = (beta/N) sum_{i<j} W; particle N pinned at 0
  const double c = beta / n_particles;
  if (n_particles == 2) {
    out.log_z = log_mean_exp_over_grid(n, 2, [&](int a, int) { return c * w[a]; }, parallel);
  } else {
    out.log_z = log_mean_exp_over_grid(
        n, 3,
        [&](int a, int b) { return c * (w[a] + w[b] + w[((a - b) % n + n) % n]); }, parallel);
  }
  return out;
}

}  // namespace

PartitionEstimate exact_z_small_n(const FourierKernel& kernel, int n_particles, double beta,
                                  int grid_size) {
  return exact_z_impl(kernel, n_particles, beta, grid_size, true);
}

namespace serial {
PartitionEstimate exact_z_small_n(const FourierKernel& kernel, int n_particles, double beta,
                                  int grid_size) {
  return exact_z_impl(kernel, n_particles, beta, grid_size, false);
}
}  // namespace serial

namespace {

// sum_{|xi|_inf > cutoff} |xi|^{2p} for the built-in power-law families.
double power_tail(int d, int cutoff, double p) {
  const double q = 2.0 * p;
  if (d == 1) {
    if (q >= -1.0) return std::numeric_limits<double>::infinity();
    const long k_max = 64L * cutoff;
    double s = 0.0;
    for (long k = k_max; k > cutoff; --k) s += std::pow(static_cast<double>(k), q);
    // Euler-Maclaurin remainder beyond k_max
    const double rest = std::pow(k_max + 0.5, q + 1.0) / (-(q + 1.0));
    return 2.0 * (s + rest);
  }
  if (q + d >= 0.0) return std::numeric_limits<double>::infinity();
  const double sphere = d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
  const double r = cutoff + 0.5;
  return sphere * std::pow(r, q + d) / (-(q + d));
}

}  // namespace

LimitZ limit_z(const FourierKernel& kernel, double beta, LimitConvention convention) {
  LimitZ out;
  // Per full-lattice frequency: weight * (c*beta*What - log1p(c*beta*What)).
  const double c = convention == LimitConvention::as_published ? 0.5 : 1.0;
  const double weight = convention == LimitConvention::as_published ? 1.0 : 0.5;
  double exponent = 0.0;
  for (const auto& m : kernel.modes()) {
    const double a = c * beta * m.coefficient;
    if (1.0 + a <= 0.0)
      throw std::domain_error("limit_z: 1 + c*beta*What(xi) <= 0, limit is infinite");
    exponent += 2.0 * weight * (a - std::log1p(a));
  }
  out.exponent = exponent;
  out.value = std::exp(exponent);
  const auto& spec = kernel.spec();
  if (spec.family != KernelFamily::fourier_table) {
    const double p = spec.family == KernelFamily::log ? -static_cast<double>(spec.dimension)
                                                      : spec.riesz_s - spec.dimension;
    out.tail_estimate = weight * c * c * beta * beta / 2.0 * power_tail(spec.dimension, spec.cutoff, p);
  }
  return out;
}

MomentIdentity moment_identity_check(const FourierKernel& kernel, int n_particles, double beta,
                                     double p, int grid_size) {
  require_small_n_1d(kernel, n_particles);
  if (p < 1.0) throw std::invalid_argument("moment identity requires p >= 1");
  MomentIdentity out;
  const auto z_beta = exact_z_small_n(kernel, n_particles, beta, grid_size);
  const auto z_pbeta = exact_z_small_n(kernel, n_particles, p * beta, grid_size);
  out.rhs = std::exp(z_pbeta.log_z - p * z_beta.log_z);

  // lhs: tabulate the normalized spatial density and integrate its p-th power
  const int n = grid_size;
  const auto w = kernel.sample_grid(n);
  const double c = beta / n_particles;
  const double norm = std::exp(-z_beta.log_z);
  if (n_particles == 2) {
    std::vector<double> v(n);
    for (int a = 0; a < n; ++a) v[a] = std::pow(norm * std::exp(-c * w[a]), p);
    out.lhs = pairwise_sum(v) / n;
  } else {
    std::vector<double> v(static_cast<std::size_t>(n) * n);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double e = c * (w[a] + w[b] + w[((a - b) % n + n) % n]);
        v[static_cast<std::size_t>(a) * n + b] = std::pow(norm * std::exp(-e), p);
      }
    out.lhs = pairwise_sum(v) / (static_cast<double>(n) * n);
  }
  return out;
}

double naive_bound_from_samples(const std::vector<double>& u, int n_particles, double beta) {
  if (u.empty()) return 1.0;
  std::vector<double> neg(u.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    neg[i] = std::max(-u[i], 0.0);
    sup = std::max(sup, neg[i]);
  }
  const double l1 = pairwise_sum(neg) / static_cast<double>(u.size());
  return std::exp(beta * n_particles * l1 * std::exp(beta * sup));
}

double naive_bound(const FourierKernel& kernel, int n_particles, double beta, int grid_size) {
  if (grid_size <= 0) grid_size = kernel.dimension() == 1 ? 4096 : 8 * kernel.cutoff() + 8;
  return naive_bound_from_samples(kernel.sample_grid(grid_size), n_particles, beta);
}

std::string to_string(RieszRegime r) {
  switch (r) {
    case RieszRegime::subcritical: return "s<d/2";
    case RieszRegime::critical: return "s=d/2";
    case RieszRegime::supercritical: return "s>d/2";
  }
  return "?";
}

TheoreticalBounds theoretical_bounds(const FourierKernel& kernel, int n_particles, double beta,
                                     double c, int grid_size) {
  if (grid_size <= 0) grid_size = kernel.dimension() == 1 ? 4096 : 4 * kernel.cutoff() + 4;
  TheoreticalBounds out;
  const double n = n_particles;
  out.bound_l2 = std::exp(c * beta * beta * kernel.l2_squared());
  const double weak = kernel.norms(grid_size).weak_l2;
  out.bound_weak_l2 = c * std::pow(n, c * beta * beta * weak * weak);
  const auto& spec = kernel.spec();
  if (spec.family == KernelFamily::riesz) {
    const double d = spec.dimension, s = spec.riesz_s;
    if (std::abs(s - d / 2) < 1e-12) {
      out.regime = RieszRegime::critical;
      out.bound_riesz = c * std::pow(n, c * beta * beta);
    } else if (s < d / 2) {
      out.regime = RieszRegime::subcritical;
      out.bound_riesz = c;
    } else {
      out.regime = RieszRegime::supercritical;
      out.bound_riesz = c * std::exp(c * std::pow(beta, d / s) * std::pow(n, 2.0 - d / s));
    }
  }
  return out;
}

}  // namespace mfl
