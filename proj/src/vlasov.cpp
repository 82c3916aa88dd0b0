#include "mfl/vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mfl/stats.hpp"

namespace mfl {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr Complex I{0.0, 1.0};

double sqrt_factorial(int n) { return std::exp(0.5 * std::lgamma(n + 1.0)); }

// Projection of He_n(scale v) onto h_0..h_{count-1} in L^2(M_beta), plus the
// squared norm left outside.
struct VelocityProjection {
  std::vector<double> p;
  double tail = 0.0;
};

VelocityProjection project_velocity(int n, double scale, double beta, int count) {
  VelocityProjection out;
  out.p.assign(count, 0.0);
  const double sb = std::sqrt(beta);
  if (n == 0 || std::abs(scale - sb) <= 1e-14 * sb) {
    const double norm = sqrt_factorial(n);
    if (n < count) out.p[n] = norm;
    else out.tail = norm * norm;
    return out;
  }
  // s = sqrt(beta) v is standard normal
  const int ns = 4801;
  const double smax = 12.0, ds = 2.0 * smax / (ns - 1);
  std::vector<std::vector<double>> rows(count, std::vector<double>(ns));
  std::vector<double> sq(ns);
  for (int i = 0; i < ns; ++i) {
    const double s = -smax + i * ds;
    const double phi = std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi) * ds;
    const double g = hermite_he(n, scale * s / sb);
    const auto h = normalized_hermite(count, s);
    for (int m = 0; m < count; ++m) rows[m][i] = g * h[m] * phi;
    sq[i] = g * g * phi;
  }
  double captured = 0.0;
  for (int m = 0; m < count; ++m) {
    out.p[m] = pairwise_sum(rows[m]);
    captured += out.p[m] * out.p[m];
  }
  out.tail = std::max(0.0, pairwise_sum(sq) - captured);
  return out;
}

double filter_factor(int n, int count) {
  const double r = count > 1 ? static_cast<double>(n) / (count - 1) : 0.0;
  return std::exp(-36.0 * std::pow(r, 36));
}

}  // namespace

HermiteField::HermiteField(double beta_, int k_modes_, int n_hermite_)
    : beta(beta_), k_modes(k_modes_), n_hermite(n_hermite_),
      coeffs(static_cast<std::size_t>(k_modes_ + 1) * n_hermite_) {
  if (!(beta > 0)) throw std::invalid_argument("HermiteField: beta must be positive");
  if (k_modes < 0 || n_hermite < 2)
    throw std::invalid_argument("HermiteField: need k_modes >= 0 and n_hermite >= 2");
}

Complex HermiteField::coeff(int k, int n) const {
  if (std::abs(k) > k_modes || n < 0 || n >= n_hermite) return 0.0;
  const Complex c = coeffs[static_cast<std::size_t>(std::abs(k)) * n_hermite + n];
  return k < 0 ? std::conj(c) : c;
}

std::vector<double> normalized_hermite(int n, double s) {
  std::vector<double> h(std::max(n, 0));
  if (n > 0) h[0] = 1.0;
  if (n > 1) h[1] = s;
  for (int m = 1; m + 1 < n; ++m)
    h[m + 1] = (s * h[m] - std::sqrt(static_cast<double>(m)) * h[m - 1]) / std::sqrt(m + 1.0);
  return h;
}

HermiteField project_initial(const Observable& f0, double beta, int k_modes, int n_hermite) {
  HermiteField field(beta, k_modes, n_hermite);
  double tail = 0.0;
  for (const auto& t : f0.terms()) {
    if (t.k[1] != 0 || t.k[2] != 0 || t.hermite[1] != 0 || t.hermite[2] != 0)
      throw std::invalid_argument("project_initial: f0 must be one-dimensional");
    int q = t.k[0];
    double coef = t.coefficient;
    if (q < 0) {
      q = -q;
      if (t.trig == Trig::sin) coef = -coef;
    }
    if (q > k_modes)
      throw std::invalid_argument("project_initial: frequency " + std::to_string(q) +
                                  " exceeds k_modes");
    if (q == 0 && t.trig == Trig::sin) continue;
    const auto proj = project_velocity(t.hermite[0], f0.velocity_scale(), beta, n_hermite);
    tail += std::abs(coef) * std::sqrt(proj.tail);
    Complex factor = (q == 0) ? Complex(coef) : Complex(0.5 * coef);
    if (t.trig == Trig::sin) factor = -I * 0.5 * coef;
    for (int m = 0; m < n_hermite; ++m) field.at(q, m) += factor * proj.p[m];
  }
  if (tail > 1e-10)
    throw std::invalid_argument("project_initial: Hermite tail above 1e-10; raise n_hermite");
  return field;
}

HermiteTrajectory solve_hermite(const FourierKernel& kernel, double beta, const Observable& f0,
                                double t_end, double dt, const HermiteParams& params) {
  return solve_hermite(kernel, project_initial(f0, beta, params.k_modes, params.n_hermite), t_end,
                       dt, params);
}

HermiteTrajectory solve_hermite(const FourierKernel& kernel, const HermiteField& initial,
                                double t_end, double dt, const HermiteParams& params) {
  if (kernel.dimension() != 1) throw std::invalid_argument("solve_hermite: d = 1 only");
  if (!(dt > 0) || t_end < 0) throw std::invalid_argument("solve_hermite: need dt > 0, T >= 0");
  const int kk = initial.k_modes, nh = initial.n_hermite;
  const double beta = initial.beta, sb = std::sqrt(beta);
  std::vector<double> sq(nh + 1);
  for (int n = 0; n <= nh; ++n) sq[n] = std::sqrt(static_cast<double>(n));
  std::vector<double> what(kk + 1);
  for (int k = 0; k <= kk; ++k) what[k] = kernel.coefficient(Frequency{k, 0, 0});

  auto rhs = [&](const std::vector<Complex>& c, std::vector<Complex>& out) {
    out.resize(c.size());
#pragma omp parallel for schedule(static)
    for (int k = 0; k <= kk; ++k) {
      const Complex* row = c.data() + static_cast<std::size_t>(k) * nh;
      Complex* d = out.data() + static_cast<std::size_t>(k) * nh;
      const Complex a = -I * (two_pi * k / sb);
      for (int n = 0; n < nh; ++n) {
        Complex s = 0.0;
        if (n > 0) s += sq[n] * row[n - 1];
        if (n + 1 < nh) s += sq[n + 1] * row[n + 1];
        d[n] = a * s;
      }
      if (nh > 1) d[1] -= I * (two_pi * k * sb * what[k]) * row[0];
    }
  };

  const long steps = std::lround(t_end / dt);
  std::vector<long> snap_steps;
  for (double t : params.snapshot_times) {
    const long s = std::lround(t / dt);
    if (t < 0 || s > steps || std::abs(s * dt - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("solve_hermite: snapshot times must be multiples of dt");
    snap_steps.push_back(s);
  }
  HermiteTrajectory traj;
  traj.rho.assign(kk + 1, {});
  traj.snapshots.resize(snap_steps.size());
  HermiteField f = initial;
  f.time = 0.0;
  auto record = [&](long step) {
    traj.times.push_back(step * dt);
    for (int k = 0; k <= kk; ++k) traj.rho[k].push_back(f.coeff(k, 0));
    traj.mass.push_back(f.coeff(0, 0).real());
    traj.momentum.push_back(f.coeff(0, 1).real() / sb);
    for (std::size_t i = 0; i < snap_steps.size(); ++i)
      if (snap_steps[i] == step) traj.snapshots[i] = f;
  };
  std::vector<Complex> k1, k2, k3, k4, tmp(f.coeffs.size());
  std::vector<double> filt(nh, 1.0);
  if (params.filter)
    for (int n = 0; n < nh; ++n) filt[n] = filter_factor(n, nh);
  record(0);
  for (long step = 1; step <= steps; ++step) {
    auto& c = f.coeffs;
    rhs(c, k1);
    for (std::size_t i = 0; i < c.size(); ++i) tmp[i] = c[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < c.size(); ++i) tmp[i] = c[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < c.size(); ++i) tmp[i] = c[i] + dt * k3[i];
    rhs(tmp, k4);
    double largest = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (params.filter) c[i] *= filt[i % nh];
      largest = std::max(largest, std::abs(c[i]));
    }
    if (!(largest <= 1e6))
      throw InstabilityError("solve_hermite: coefficient magnitude exceeded 1e6 at t = " +
                             std::to_string(step * dt));
    f.time = step * dt;
    record(step);
  }
  traj.final_field = f;
  return traj;
}

Complex VolterraSolution::rho_at(int mode, std::size_t step) const {
  const int a = std::abs(mode);
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] == a) return mode < 0 ? std::conj(rho[i][step]) : rho[i][step];
  return 0.0;
}

Complex free_transport_mode(const HermiteField& initial, int k, double t) {
  const double a = two_pi * k * t / std::sqrt(initial.beta);
  const Complex z = -I * a;
  Complex pw = 1.0, s = 0.0;
  double inv = 1.0;
  for (int n = 0; n < initial.n_hermite; ++n) {
    if (n > 0) {
      pw *= z;
      inv /= std::sqrt(static_cast<double>(n));
    }
    s += initial.coeff(k, n) * pw * inv;
  }
  return s * std::exp(-0.5 * a * a);
}

VolterraSolution solve_volterra(const FourierKernel& kernel, double beta, const Observable& f0,
                                double t_end, double dt, int k_modes, int n_hermite) {
  if (kernel.dimension() != 1) throw std::invalid_argument("solve_volterra: d = 1 only");
  if (!(dt > 0) || t_end < 0) throw std::invalid_argument("solve_volterra: need dt > 0, T >= 0");
  const HermiteField init = project_initial(f0, beta, k_modes, n_hermite);
  const long steps = std::lround(t_end / dt);
  VolterraSolution sol;
  sol.beta = beta;
  for (long n = 0; n <= steps; ++n) sol.times.push_back(n * dt);
  for (int k = 1; k <= k_modes; ++k) {
    sol.k.push_back(k);
    sol.w_hat.push_back(kernel.coefficient(Frequency{k, 0, 0}));
  }
  sol.rho.assign(sol.k.size(), std::vector<Complex>(steps + 1));
  sol.source.assign(sol.k.size(), std::vector<Complex>(steps + 1));
  const int nk = static_cast<int>(sol.k.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < nk; ++i) {
    const int k = sol.k[i];
    const double wk = sol.w_hat[i], w2 = std::pow(two_pi * k, 2);
    std::vector<double> g(steps + 1);
    for (long n = 0; n <= steps; ++n) {
      const double tau = n * dt;
      g[n] = -w2 * wk * tau * std::exp(-w2 * tau * tau / (2.0 * beta));
    }
    auto& rho = sol.rho[i];
    auto& src = sol.source[i];
    for (long n = 0; n <= steps; ++n) src[n] = free_transport_mode(init, k, n * dt);
    rho[0] = src[0];
    std::vector<double> re, im;
    for (long n = 1; n <= steps; ++n) {
      // G(0) = 0 makes the trapezoid rule explicit
      re.assign(n, 0.0);
      im.assign(n, 0.0);
      re[0] = 0.5 * g[n] * rho[0].real();
      im[0] = 0.5 * g[n] * rho[0].imag();
      for (long j = 1; j < n; ++j) {
        re[j] = g[n - j] * rho[j].real();
        im[j] = g[n - j] * rho[j].imag();
      }
      rho[n] = src[n] + dt * Complex(pairwise_sum(re), pairwise_sum(im));
    }
  }
  return sol;
}

std::vector<double> free_transport_exact(const Observable& f0, double beta, double t,
                                         const std::vector<PhasePoint>& points) {
  std::vector<double> out(points.size());
  const double norm = std::sqrt(beta / (2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double m = norm * std::exp(-0.5 * beta * p.v * p.v);
    out[i] = f0(Point{p.x - p.v * t, 0, 0}, Point{p.v, 0, 0}) * m;
  }
  return out;
}

DensityForce density_and_force(const HermiteField& field, const FourierKernel& kernel, int n) {
  if (n < 1) throw std::invalid_argument("density_and_force: need n >= 1");
  DensityForce out;
  out.x.resize(n);
  out.rho.resize(n);
  out.force.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    out.x[i] = x;
    double r = field.coeff(0, 0).real(), f = 0.0;
    for (int k = 1; k <= field.k_modes; ++k) {
      const Complex e = std::polar(1.0, two_pi * k * x);
      const Complex rk = field.coeff(k, 0);
      // K^(k) = -2 pi i k What(k)
      const Complex fk = -I * (two_pi * k * kernel.coefficient(Frequency{k, 0, 0})) * rk;
      r += 2.0 * (rk * e).real();
      f += 2.0 * (fk * e).real();
    }
    out.rho[i] = r;
    out.force[i] = f;
  }
  return out;
}

double pairing(const HermiteField& field, const Observable& phi) {
  const double sb = std::sqrt(field.beta);
  double total = 0.0;
  for (const auto& t : phi.terms()) {
    if (t.k[1] != 0 || t.k[2] != 0 || t.hermite[1] != 0 || t.hermite[2] != 0)
      throw std::invalid_argument("pairing: test function must be one-dimensional");
    const int m = t.hermite[0];
    if (m > 0 && std::abs(phi.velocity_scale() - sb) > 1e-14 * sb)
      throw std::invalid_argument("pairing: Hermite factors must use scale sqrt(beta)");
    int q = t.k[0];
    double coef = t.coefficient;
    if (q < 0) {
      q = -q;
      if (t.trig == Trig::sin) coef = -coef;
    }
    const Complex c = field.coeff(q, m);
    const double s = sqrt_factorial(m);
    if (t.trig == Trig::cos) total += coef * s * c.real();
    else if (q != 0) total -= coef * s * c.imag();
  }
  return total;
}

}  // namespace mfl
