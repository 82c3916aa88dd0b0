#pragma once

// Linearized Vlasov equation around the Maxwellian in d = 1,
//   d_t f + v d_x f + (K * rho) d_v M_beta = 0,
// solved by a Fourier-Hermite spectral method and, independently, by the
// per-mode Volterra equation for the density.
//
// Hermite basis: f = M_beta(v) sum_{k,n} c_{k,n} e^{2 pi i k x} h_n(sqrt(beta) v)
// with h_n = He_n / sqrt(n!). Only k >= 0 is stored; c_{-k,n} = conj(c_{k,n}).

#include <complex>
#include <vector>

#include "mfl/kernels.hpp"
#include "mfl/observable.hpp"

namespace mfl {

using Complex = std::complex<double>;

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HermiteField {
  double beta = 1.0;
  int k_modes = 0;
  int n_hermite = 0;
  double time = 0.0;
  // (k_modes + 1) x n_hermite, row k
  std::vector<Complex> coeffs;

  HermiteField() = default;
  HermiteField(double beta, int k_modes, int n_hermite);
  Complex& at(int k, int n) { return coeffs[static_cast<std::size_t>(k) * n_hermite + n]; }
  // any k in [-k_modes, k_modes]
  Complex coeff(int k, int n) const;
  Complex rho(int k) const { return coeff(k, 0); }
};

// h_0..h_{n-1} at s.
std::vector<double> normalized_hermite(int n, double s);

// Projects f0(x, v) M_beta(v) onto the basis. Throws std::invalid_argument if
// f0 has frequencies beyond k_modes, d != 1 content, or a Hermite tail above
// 1e-10.
HermiteField project_initial(const Observable& f0, double beta, int k_modes, int n_hermite);

struct HermiteParams {
  int k_modes = 1;
  int n_hermite = 128;
  bool filter = false;
  // store full fields at these times (multiples of dt)
  std::vector<double> snapshot_times;
};

struct HermiteTrajectory {
  std::vector<double> times;
  // rho[k][step] for k = 0..k_modes
  std::vector<std::vector<Complex>> rho;
  std::vector<double> mass;
  std::vector<double> momentum;
  std::vector<HermiteField> snapshots;
  HermiteField final_field;
};

// Explicit RK4. Throws InstabilityError if any |c| exceeds 1e6.
HermiteTrajectory solve_hermite(const FourierKernel& kernel, double beta, const Observable& f0,
                                double t_end, double dt, const HermiteParams& params);
HermiteTrajectory solve_hermite(const FourierKernel& kernel, const HermiteField& initial,
                                double t_end, double dt, const HermiteParams& params);

struct VolterraSolution {
  double beta = 1.0;
  std::vector<double> times;
  std::vector<int> k;
  std::vector<double> w_hat;
  // rho[i][step] and source[i][step] for mode k[i]
  std::vector<std::vector<Complex>> rho;
  std::vector<std::vector<Complex>> source;

  // rho_k at time index; negative k by conjugation, zero for absent modes.
  Complex rho_at(int mode, std::size_t step) const;
};

// rho_k(t) = S_k(t) + int_0^t G_k(t - s) rho_k(s) ds with
// G_k(tau) = -(2 pi k)^2 What(k) tau exp(-(2 pi k tau)^2 / (2 beta)),
// trapezoidal rule. Modes k = 1..k_modes run in parallel.
VolterraSolution solve_volterra(const FourierKernel& kernel, double beta, const Observable& f0,
                                double t_end, double dt, int k_modes = 1, int n_hermite = 64);

// Density mode under free streaming from Hermite data:
// S_k(t) = sum_n c_{k,n}(0) (-i a)^n / sqrt(n!) e^{-a^2/2}, a = 2 pi k t / sqrt(beta).
Complex free_transport_mode(const HermiteField& initial, int k, double t);

struct PhasePoint {
  double x = 0.0;
  double v = 0.0;
};

// f(t, x, v) = f0(x - v t, v) M_beta(v)
std::vector<double> free_transport_exact(const Observable& f0, double beta, double t,
                                         const std::vector<PhasePoint>& points);

struct DensityForce {
  std::vector<double> x;
  std::vector<double> rho;
  std::vector<double> force;
};

// rho and K * rho on the uniform grid {i / n}.
DensityForce density_and_force(const HermiteField& field, const FourierKernel& kernel, int n);

// <phi, f> for test functions whose Hermite factors use scale sqrt(beta).
double pairing(const HermiteField& field, const Observable& phi);

}  // namespace mfl
