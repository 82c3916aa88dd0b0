#include "mfl/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mfl/stats.hpp"

namespace mfl {

ConfiningKind parse_confining(const std::string& s) {
  if (s == "constant") return ConfiningKind::constant;
  if (s == "quadratic") return ConfiningKind::quadratic;
  if (s == "quartic") return ConfiningKind::quartic;
  if (s == "double-well") return ConfiningKind::double_well;
  throw std::invalid_argument("unknown confining potential '" + s + "'");
}

InteractionKind parse_interaction(const std::string& s) {
  if (s == "none") return InteractionKind::none;
  if (s == "gaussian") return InteractionKind::gaussian;
  if (s == "cosine-localized") return InteractionKind::cosine_localized;
  throw std::invalid_argument("unknown interaction '" + s + "'");
}

std::string to_string(ConfiningKind k) {
  switch (k) {
    case ConfiningKind::constant: return "constant";
    case ConfiningKind::quadratic: return "quadratic";
    case ConfiningKind::quartic: return "quartic";
    case ConfiningKind::double_well: return "double-well";
  }
  return "";
}

std::string to_string(InteractionKind k) {
  switch (k) {
    case InteractionKind::none: return "none";
    case InteractionKind::gaussian: return "gaussian";
    case InteractionKind::cosine_localized: return "cosine-localized";
  }
  return "";
}

double confining_potential(ConfiningKind kind, double x) {
  switch (kind) {
    case ConfiningKind::constant: return 0.0;
    case ConfiningKind::quadratic: return x * x;
    case ConfiningKind::quartic: return x * x * x * x;
    case ConfiningKind::double_well: return (x * x - 1.0) * (x * x - 1.0);
  }
  return 0.0;
}

double interaction_potential(const ConfinedProblem& p, double x) {
  const double g = std::exp(-x * x / (p.width * p.width));
  switch (p.interaction) {
    case InteractionKind::none: return 0.0;
    case InteractionKind::gaussian: return p.amplitude * g;
    case InteractionKind::cosine_localized:
      return p.amplitude * std::cos(std::numbers::pi * x / p.width) * g;
  }
  return 0.0;
}

ConfinedGrid::ConfinedGrid(const ConfinedProblem& problem) : problem_(problem) {
  if (!(problem.half_width > 0) || problem.grid_points < 3)
    throw std::invalid_argument("ConfinedProblem: need L > 0 and at least 3 grid points");
  if (!(problem.beta >= 0)) throw std::invalid_argument("ConfinedProblem: beta must be >= 0");
  if (!(problem.width > 0)) throw std::invalid_argument("ConfinedProblem: width must be positive");
  const int n = problem.grid_points;
  const double h = 2.0 * problem.half_width / (n - 1);
  x_.resize(n);
  w_.assign(n, h);
  w_.front() = w_.back() = 0.5 * h;
  v_.resize(n);
  for (int i = 0; i < n; ++i) {
    x_[i] = -problem.half_width + i * h;
    v_[i] = confining_potential(problem.confining, x_[i]);
  }
  kernel_.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) kernel_[static_cast<std::size_t>(i) * n + j] =
        interaction_potential(problem, x_[i] - x_[j]) * w_[j];
}

double ConfinedGrid::integrate(const std::vector<double>& f) const {
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = f[i] * w_[i];
  return pairwise_sum(t);
}

double ConfinedGrid::l1_distance(const std::vector<double>& a, const std::vector<double>& b) const {
  std::vector<double> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) t[i] = std::abs(a[i] - b[i]) * w_[i];
  return pairwise_sum(t);
}

std::vector<double> ConfinedGrid::convolve(const std::vector<double>& rho) const {
  const int n = size();
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j) t[j] = kernel_[static_cast<std::size_t>(i) * n + j] * rho[j];
    out[i] = pairwise_sum(t);
  }
  return out;
}

double ConfinedGrid::convolve_at(const std::vector<double>& rho, double y) const {
  std::vector<double> t(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j)
    t[j] = interaction_potential(problem_, y - x_[j]) * w_[j] * rho[j];
  return pairwise_sum(t);
}

double ConfinedGrid::tail_mass() const {
  const double beta = problem_.beta, l = problem_.half_width;
  const int n = 4 * problem_.grid_points;
  const double h = 8.0 * l / (n - 1);
  std::vector<double> inside, outside;
  for (int i = 0; i < n; ++i) {
    const double x = -4.0 * l + i * h;
    const double e = std::exp(-beta * confining_potential(problem_.confining, x)) * h;
    (std::abs(x) <= l ? inside : outside).push_back(e);
  }
  const double a = pairwise_sum(inside), b = pairwise_sum(outside);
  return b / (a + b);
}

namespace {

std::vector<double> gibbs_normalize(const ConfinedGrid& grid, const std::vector<double>& field) {
  // exp(-beta (V + field)) / int, with max-subtraction in the exponent
  const double beta = grid.problem().beta;
  const auto& v = grid.potential();
  const int n = grid.size();
  std::vector<double> e(n);
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    e[i] = -beta * (v[i] + field[i]);
    top = std::max(top, e[i]);
  }
  for (auto& x : e) x = std::exp(x - top);
  const double z = grid.integrate(e);
  for (auto& x : e) x /= z;
  return e;
}

}  // namespace

std::vector<double> reference_measure(const ConfinedGrid& grid) {
  return gibbs_normalize(grid, std::vector<double>(grid.size(), 0.0));
}

std::vector<double> apply_S(const ConfinedGrid& grid, const std::vector<double>& rho) {
  return gibbs_normalize(grid, grid.convolve(rho));
}

namespace serial {

std::vector<double> apply_S(const ConfinedGrid& grid, const std::vector<double>& rho) {
  const int n = grid.size();
  const auto& x = grid.x();
  const auto& w = grid.weights();
  std::vector<double> conv(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j) t[j] = interaction_potential(grid.problem(), x[i] - x[j]) * w[j] * rho[j];
    conv[i] = pairwise_sum(t);
  }
  return gibbs_normalize(grid, conv);
}

}  // namespace serial

FixedPointResult solve_fixed_point(const ConfinedGrid& grid, double tol, int max_iter) {
  if (!(tol > 0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");
  FixedPointResult out;
  std::vector<double> rho = reference_measure(grid);
  int above = 0;
  for (int it = 1; it <= max_iter; ++it) {
    auto next = apply_S(grid, rho);
    const double d = grid.l1_distance(next, rho);
    out.iterates.push_back(d);
    if (out.iterates.size() > 1) {
      const double prev = out.iterates[out.iterates.size() - 2];
      const double r = prev > 0 ? d / prev : 0.0;
      out.contraction_ratios.push_back(r);
      above = r > 1.0 ? above + 1 : 0;
      if (above >= 5)
        throw NonContraction("solve_fixed_point: ratios above 1 for 5 iterations at beta = " +
                             std::to_string(grid.problem().beta));
    }
    rho = std::move(next);
    out.iterations = it;
    if (d < tol) break;
    if (it == max_iter)
      throw std::runtime_error("solve_fixed_point: no convergence in " + std::to_string(max_iter) +
                               " iterations");
  }
  out.residual = grid.l1_distance(rho, apply_S(grid, rho));
  out.rho = std::move(rho);
  return out;
}

GeometricFit geometric_fit(const FixedPointResult& result, double floor) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < result.iterates.size(); ++i)
    if (result.iterates[i] > floor) {
      xs.push_back(static_cast<double>(i));
      ys.push_back(std::log(result.iterates[i]));
    }
  GeometricFit g;
  g.points = static_cast<int>(xs.size());
  if (xs.size() < 3) return g;
  const auto fit = least_squares(xs, ys);
  g.rate = std::exp(fit.slope);
  g.r_squared = fit.r_squared;
  return g;
}

NormSweep eta_norm_monotonicity(const ConfinedProblem& problem, double q,
                                const std::vector<double>& betas) {
  if (!(q >= 1)) throw std::invalid_argument("eta_norm_monotonicity: need q >= 1");
  NormSweep out;
  out.betas = betas;
  ConfinedProblem p = problem;
  p.interaction = InteractionKind::none;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    if (!(betas[b] > 0) || (b > 0 && !(betas[b] > betas[b - 1])))
      throw std::invalid_argument("eta_norm_monotonicity: beta grid must be positive, increasing");
    p.beta = betas[b];
    ConfinedGrid grid(p);
    // log ||eta||_q = (1/q) log int exp(-q beta V) - log int exp(-beta V)
    const auto& v = grid.potential();
    const double vmin = *std::min_element(v.begin(), v.end());
    std::vector<double> a(v.size()), c(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      a[i] = std::exp(-q * betas[b] * (v[i] - vmin));
      c[i] = std::exp(-betas[b] * (v[i] - vmin));
    }
    const double log_norm = std::log(grid.integrate(a)) / q - std::log(grid.integrate(c));
    out.norms.push_back(std::exp(log_norm));
    if (b > 0 && out.norms[b] < out.norms[b - 1] * (1.0 - 1e-12)) out.nondecreasing = false;
  }
  return out;
}

CenteredKernel centered_kernel(const ConfinedGrid& grid, const std::vector<double>& rho_star) {
  const int n = grid.size();
  const auto& x = grid.x();
  CenteredKernel k;
  k.n = n;
  k.w_rho = grid.convolve(rho_star);
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = k.w_rho[i] * rho_star[i];
  k.double_integral = grid.integrate(t);
  k.values.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = interaction_potential(grid.problem(), x[i] - x[j]) - k.w_rho[i] -
                       k.w_rho[j] + k.double_integral;
      k.values[static_cast<std::size_t>(i) * n + j] = v;
      k.values[static_cast<std::size_t>(j) * n + i] = v;
    }
  return k;
}

double cancellation_error(const ConfinedGrid& grid, const CenteredKernel& wb,
                          const std::vector<double>& rho_star) {
  const int n = grid.size();
  double worst = 0.0;
  std::vector<double> r(n), c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      r[j] = wb(i, j) * rho_star[j];
      c[j] = wb(j, i) * rho_star[j];
    }
    worst = std::max({worst, std::abs(grid.integrate(r)), std::abs(grid.integrate(c))});
  }
  return worst;
}

double modified_partition_n2(const ConfinedGrid& grid, const CenteredKernel& wb,
                             const std::vector<double>& rho_star) {
  const int n = grid.size();
  const double beta = grid.problem().beta;
  std::vector<double> inner(n), row(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row[j] = std::exp(-0.5 * beta * wb(i, j)) * rho_star[j];
    inner[i] = grid.integrate(row) * rho_star[i];
  }
  return grid.integrate(inner);
}

double nystrom_density(const ConfinedGrid& grid, const std::vector<double>& rho_star, double x) {
  const double beta = grid.problem().beta;
  const auto conv = grid.convolve(rho_star);
  const auto& v = grid.potential();
  const int n = grid.size();
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) {
    e[i] = -beta * (v[i] + conv[i]);
    top = std::max(top, e[i]);
  }
  for (auto& y : e) y = std::exp(y - top);
  const double z = grid.integrate(e);
  const double ex = -beta * (confining_potential(grid.problem().confining, x) +
                             grid.convolve_at(rho_star, x));
  return std::exp(ex - top) / z;
}

double maxwellian_equilibrium(const ConfinedGrid& grid, const std::vector<double>& rho_star,
                              double x, double v) {
  const double beta = grid.problem().beta;
  const double gamma = std::sqrt(beta / (2.0 * std::numbers::pi)) * std::exp(-0.5 * beta * v * v);
  return gamma * nystrom_density(grid, rho_star, x);
}

double maxwellian_rhs(const ConfinedGrid& grid, const std::vector<double>& rho_star, double x,
                      double v) {
  // Z_beta = sqrt(2 pi / beta) * int exp(-beta V - beta W * rho) dx
  const double beta = grid.problem().beta;
  const auto conv = grid.convolve(rho_star);
  const auto& pot = grid.potential();
  std::vector<double> e(grid.size());
  for (int i = 0; i < grid.size(); ++i) e[i] = std::exp(-beta * (pot[i] + conv[i]));
  const double z = std::sqrt(2.0 * std::numbers::pi / beta) * grid.integrate(e);
  const double ex = -0.5 * beta * v * v -
                    beta * (confining_potential(grid.problem().confining, x) +
                            grid.convolve_at(rho_star, x));
  return std::exp(ex) / z;
}

}  // namespace mfl
