#pragma once

// Confined mean-field equilibrium on [-L, L] (d = 1): Picard iteration of
//   S_beta(rho) = exp(-beta V - beta W * rho) / int exp(-beta V - beta W * rho),
// the reference measure eta_beta = exp(-beta V) / int exp(-beta V), and the
// rho-centered interaction kernel.

#include <stdexcept>
#include <string>
#include <vector>

namespace mfl {

enum class ConfiningKind { constant, quadratic, quartic, double_well };
enum class InteractionKind { none, gaussian, cosine_localized };

struct ConfinedProblem {
  double half_width = 8.0;
  int grid_points = 401;
  double beta = 1.0;
  ConfiningKind confining = ConfiningKind::quadratic;
  InteractionKind interaction = InteractionKind::gaussian;
  // W(x) = amplitude * exp(-x^2 / width^2) or amplitude * cos(pi x / width) exp(-x^2 / width^2)
  double amplitude = 0.1;
  double width = 1.0;

  bool operator==(const ConfinedProblem&) const = default;
};

ConfiningKind parse_confining(const std::string& s);
InteractionKind parse_interaction(const std::string& s);
std::string to_string(ConfiningKind k);
std::string to_string(InteractionKind k);

// constant: 0; quadratic: x^2; quartic: x^4; double-well: (x^2 - 1)^2.
double confining_potential(ConfiningKind kind, double x);
double interaction_potential(const ConfinedProblem& p, double x);

class NonContraction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid, trapezoid weights and the interaction matrix W(x_i - x_j) w_j.
class ConfinedGrid {
 public:
  explicit ConfinedGrid(const ConfinedProblem& problem);

  const ConfinedProblem& problem() const { return problem_; }
  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& potential() const { return v_; }

  double integrate(const std::vector<double>& f) const;
  double l1_distance(const std::vector<double>& a, const std::vector<double>& b) const;
  // (W * rho)(x_i) by quadrature
  std::vector<double> convolve(const std::vector<double>& rho) const;
  // (W * rho)(y) at an arbitrary point
  double convolve_at(const std::vector<double>& rho, double y) const;
  // log int exp(-beta V) over the grid, with the tail budget of exp(-beta V)
  // outside [-L, L] estimated on a 4x wider grid.
  double tail_mass() const;

 private:
  ConfinedProblem problem_;
  std::vector<double> x_, w_, v_, kernel_;
};

std::vector<double> reference_measure(const ConfinedGrid& grid);

std::vector<double> apply_S(const ConfinedGrid& grid, const std::vector<double>& rho);
namespace serial {
std::vector<double> apply_S(const ConfinedGrid& grid, const std::vector<double>& rho);
}

struct FixedPointResult {
  std::vector<double> rho;
  std::vector<double> iterates;
  std::vector<double> contraction_ratios;
  double residual = 0.0;
  int iterations = 0;
};

// Picard iteration from eta_beta until the L1 update falls below tol. Throws
// NonContraction after 5 consecutive ratios above 1 and std::runtime_error
// after max_iter.
FixedPointResult solve_fixed_point(const ConfinedGrid& grid, double tol = 1e-12,
                                   int max_iter = 500);

struct GeometricFit {
  double rate = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

// Least squares of log(distance) against the iteration index, restricted to
// distances above floor.
GeometricFit geometric_fit(const FixedPointResult& result, double floor = 1e-13);

struct NormSweep {
  std::vector<double> betas;
  std::vector<double> norms;
  bool nondecreasing = true;
};

// ||eta_beta||_{L^q} over an increasing beta grid, computed in log space.
NormSweep eta_norm_monotonicity(const ConfinedProblem& problem, double q,
                                const std::vector<double>& betas);

struct CenteredKernel {
  int n = 0;
  // row-major W_beta(x_i, x_j)
  std::vector<double> values;
  std::vector<double> w_rho;
  double double_integral = 0.0;

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
};

CenteredKernel centered_kernel(const ConfinedGrid& grid, const std::vector<double>& rho_star);

// max_i |int W_beta(x_i, y) rho(y) dy| and the same with the roles swapped.
double cancellation_error(const ConfinedGrid& grid, const CenteredKernel& wb,
                          const std::vector<double>& rho_star);

// Zhat_2 = int int exp(-beta/2 W_beta(x, y)) rho(x) rho(y) dx dy
double modified_partition_n2(const ConfinedGrid& grid, const CenteredKernel& wb,
                             const std::vector<double>& rho_star);

// rho_star extended off the grid by one application of S (Nystrom).
double nystrom_density(const ConfinedGrid& grid, const std::vector<double>& rho_star, double x);

// gamma_beta(v) * rho_star(x)
double maxwellian_equilibrium(const ConfinedGrid& grid, const std::vector<double>& rho_star,
                              double x, double v);
// Z_beta^{-1} exp(-beta v^2/2 - beta V - beta W * M_beta) evaluated directly.
double maxwellian_rhs(const ConfinedGrid& grid, const std::vector<double>& rho_star, double x,
                      double v);

}  // namespace mfl
