#pragma once

// Hoeffding (ANOVA) correlation functions of symmetric N-particle densities
// on a tensor phase-space grid, and Monte Carlo pair-correlation pairings
// from weighted ensembles.
//
// Single-particle grid: nx periodic points on T^1 times nv uniform points on
// [-vmax, vmax]. Point index p = ix * nv + iv; an m-particle tensor is stored
// row-major over (p_1, ..., p_m). The reference M_beta is normalized so its
// discrete integral is exactly 1, which makes all projection identities hold
// to rounding on the grid.

#include <cstdint>
#include <functional>
#include <vector>

#include "mfl/dynamics.hpp"
#include "mfl/kernels.hpp"
#include "mfl/observable.hpp"
#include "mfl/stats.hpp"

namespace mfl {

struct PhaseGrid {
  int nx = 16;
  int nv = 16;
  double beta = 1.0;
  // 0 selects 6 / sqrt(beta)
  double vmax = 0.0;

  int points() const { return nx * nv; }
  double v_limit() const;
  double x(int p) const;
  double v(int p) const;
  double weight() const;
  std::vector<double> maxwellian() const;

  bool operator==(const PhaseGrid&) const = default;
};

struct GridDensity {
  int m = 0;
  PhaseGrid grid;
  std::vector<double> values;
  std::vector<double> reference;

  GridDensity() = default;
  GridDensity(int m, const PhaseGrid& grid);
  std::size_t size() const { return values.size(); }
  double integral() const;
};

// Tabulates f(z_1, ..., z_m) with z_i = (x_i, v_i).
GridDensity tabulate(const PhaseGrid& grid, int m,
                     const std::function<double(const std::vector<double>& x,
                                                const std::vector<double>& v)>& f);
// M_beta^{(x)N} * sum_j g(z_j)
GridDensity fluctuation_density(const PhaseGrid& grid, int n, const Observable& g);
// (sum_j f0(z_j)) M_{N,beta}(z): signed initial data under the Gibbs measure
// with pair potential W / N, spatial part normalized by grid quadrature.
GridDensity gibbs_fluctuation_density(const PhaseGrid& grid, int n, const FourierKernel& kernel,
                                      const Observable& f0);

GridDensity project_centered(const GridDensity& h);

// Integrates out the trailing coordinates down to order j.
GridDensity marginal(const GridDensity& f, int j);

// H_{N,m} by inclusion-exclusion over marginals. Throws if N > 3 or m > N.
GridDensity hoeffding_exact(const GridDensity& fn, int m);
// H_{N,m} as (Id - pi)^{(x)m} F_{N,m}, applied one coordinate at a time.
GridDensity hoeffding_tensor(const GridDensity& fn, int m);

struct OrthogonalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

// sum_{m=0}^N binom(N,m) int |H_{N,m}|^2 / M^{(x)m} versus
// int |F_N|^2 / M^{(x)N}.
OrthogonalityCheck orthogonality_check(const GridDensity& fn);

// <psi (x) chi, H> on the grid (m = 2) or <psi, H> (m = 1).
double grid_pairing(const GridDensity& h, const Observable& psi);
double grid_pairing(const GridDensity& h, const Observable& psi, const Observable& chi);

double max_abs(const GridDensity& h);

struct PairPairing {
  Observable psi;
  Observable chi;
  double value = 0.0;
  double stderr_ = 0.0;
};

// <psi (x) chi, H_{N,2}> = <psi (x) chi, F_{N,2}> - <psi, F_{N,1}><chi, M>
//                         - <psi, M><chi, F_{N,1}>
// with replica bootstrap for the standard error.
PairPairing pair_pairing_estimate(const Snapshots& snaps, std::size_t time_index,
                                  const Observable& psi, const Observable& chi,
                                  int bootstrap = 256, std::uint64_t seed = 1);

// Per-replica contributions of the pairing above.
std::vector<double> pair_pairing_values(const Snapshots& snaps, std::size_t time_index,
                                        const Observable& psi, const Observable& chi);

// Standard deviation of bootstrap means. Resamples run in parallel into
// indexed slots.
double bootstrap_stderr(const std::vector<double>& values, int resamples, std::uint64_t seed);

// R(t) = < d_v phi, int K(x - x_*) H_{N,2}(z, z_*) dz_* >, d = 1.
Estimate vlasov_remainder_estimate(const Snapshots& snaps, std::size_t time_index,
                                   const Observable& test, const FourierKernel& kernel);

}  // namespace mfl
