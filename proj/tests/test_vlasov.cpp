#include <stdexcept>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mfl/vlasov.hpp"
#include "oracles.hpp"

using mfl::Complex;
constexpr double pi = std::numbers::pi;

namespace {

// Free-streaming density mode k=1 for f0 = cos(2 pi x)(1 + 0.5 sqrt(beta) v) by velocity quadrature.
Complex free_mode_quadrature(double beta, double t) {
  const double vmax = 12.0 / std::sqrt(beta);
  auto re = [&](double v) {
    return 0.5 * (1 + 0.5 * std::sqrt(beta) * v) * oracle::gaussian_density(v, beta) * std::cos(2 * pi * v * t);
  };
  auto im = [&](double v) {
    return -0.5 * (1 + 0.5 * std::sqrt(beta) * v) * oracle::gaussian_density(v, beta) * std::sin(2 * pi * v * t);
  };
  return {oracle::trapezoid(re, -vmax, vmax, 8000), oracle::trapezoid(im, -vmax, vmax, 8000)};
}

double free_density_error(int n_hermite, double t_end, double dt) {
  const double beta = 1.0;
  const auto f0 = mfl::parse_observable("cos(1)", 1.0);
  mfl::HermiteParams p;
  p.n_hermite = n_hermite;
  const auto tr = mfl::solve_hermite(mfl::zero_kernel(1), beta, f0, t_end, dt, p);
  double sq = 0.0;
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    const double a = 2 * pi * tr.times[s] / std::sqrt(beta);
    sq += std::norm(tr.rho[1][s] - 0.5 * std::exp(-0.5 * a * a));
  }
  return std::sqrt(sq / tr.times.size());
}

}  // namespace

TEST_SUITE("vlasov") {
  TEST_CASE("spatially homogeneous data is stationary") {
    const auto f0 = mfl::Observable::hermite(2, 1.0);
    mfl::HermiteParams p;
    p.n_hermite = 16;
    const auto tr = mfl::solve_hermite(mfl::cosine_kernel(), 1.0, f0, 1.0, 0.01, p);
    const auto init = mfl::project_initial(f0, 1.0, 1, 16);
    for (std::size_t i = 0; i < init.coeffs.size(); ++i)
      CHECK(std::abs(tr.final_field.coeffs[i] - init.coeffs[i]) < 1e-14);
  }

  TEST_CASE("zero data stays zero") {
    mfl::HermiteParams p;
    p.n_hermite = 16;
    const auto tr = mfl::solve_hermite(mfl::cosine_kernel(), 1.0, mfl::Observable::zero(), 1.0, 0.01, p);
    for (const auto& c : tr.final_field.coeffs) CHECK(c == Complex{});
  }

  TEST_CASE("free transport density modes") {
    const double beta = 2.0;
    const auto f0 = mfl::parse_observable("cos(1) + 0.5*cos(1)*He(1)", std::sqrt(beta));
    const auto init = mfl::project_initial(f0, beta, 1, 64);
    for (double t : {0.0, 0.1, 0.3, 0.7}) {
      const auto q = free_mode_quadrature(beta, t);
      CHECK(std::abs(mfl::free_transport_mode(init, 1, t) - q) < 1e-10);
    }
    mfl::HermiteParams p;
    p.n_hermite = 128;
    const auto tr = mfl::solve_hermite(mfl::zero_kernel(1), beta, f0, 1.0, 0.0025, p);
    for (std::size_t s = 0; s < tr.times.size(); s += 40)
      CHECK(std::abs(tr.rho[1][s] - free_mode_quadrature(beta, tr.times[s])) < 1e-8);
    CHECK(free_density_error(128, 2.0, 0.01) < 1e-4);
  }

  TEST_CASE("hermite truncation convergence for free transport") {
    const double e32 = free_density_error(32, 1.0, 0.0025), e64 = free_density_error(64, 1.0, 0.0025);
    MESSAGE("free density error N_H=32 " << e32 << " N_H=64 " << e64);
    CHECK(e64 <= std::max(e32 / 10, 1e-12));
  }

  TEST_CASE("volterra without interaction returns the source") {
    const auto f0 = mfl::parse_observable("cos(1) + 0.5*cos(1)*He(1)", 1.0);
    const auto vs = mfl::solve_volterra(mfl::zero_kernel(1), 1.0, f0, 1.0, 0.01);
    for (std::size_t s = 0; s < vs.times.size(); ++s) {
      CHECK(vs.rho[0][s] == vs.source[0][s]);
      if (s % 10 == 0) CHECK(std::abs(vs.source[0][s] - free_mode_quadrature(1.0, vs.times[s])) < 1e-10);
    }
  }

  TEST_CASE("hermite and volterra solutions agree") {
    const double beta = 1.0;
    const auto f0 = mfl::Observable::cos_mode(1);
    const auto k = mfl::cosine_kernel();
    mfl::HermiteParams p;
    p.n_hermite = 512;
    const double dt = 0.005;
    const auto h = mfl::solve_hermite(k, beta, f0, 5.0, dt, p);
    const auto v = mfl::solve_volterra(k, beta, f0, 5.0, dt);
    double worst = 0.0;
    for (std::size_t s = 0; s < h.times.size(); ++s)
      worst = std::max(worst, std::abs(h.rho[1][s] - v.rho_at(1, s)));
    MESSAGE("sup |rho_hermite - rho_volterra| = " << worst);
    CHECK(worst < 1e-3);
  }

  TEST_CASE("mass and momentum are conserved") {
    const auto f0 = mfl::parse_observable("cos(1) + 0.3*He(1) + 0.2*He(2)", 1.0);
    mfl::HermiteParams p;
    p.n_hermite = 64;
    const auto tr = mfl::solve_hermite(mfl::cosine_kernel(), 1.0, f0, 2.0, 0.01, p);
    for (std::size_t s = 0; s < tr.times.size(); ++s) {
      CHECK(std::abs(tr.mass[s] - tr.mass[0]) < 1e-12);
      CHECK(std::abs(tr.momentum[s] - tr.momentum[0]) < 1e-10);
    }
    CHECK(tr.momentum[0] == doctest::Approx(0.3));
  }

  TEST_CASE("time step refinement is fourth order") {
    const double e1 = free_density_error(64, 1.0, 0.01), e2 = free_density_error(64, 1.0, 0.005);
    MESSAGE("rk4 error ratio " << e1 / e2);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
  }

  TEST_CASE("density and force from a single mode") {
    mfl::HermiteField f(1.0, 1, 4);
    f.at(1, 0) = 1.0;
    const auto k = mfl::cosine_kernel();
    const auto df = mfl::density_and_force(f, k, 32);
    for (std::size_t i = 0; i < df.x.size(); ++i) {
      const double x = df.x[i];
      CHECK(df.rho[i] == doctest::Approx(2 * std::cos(2 * pi * x)).epsilon(1e-12));
      const double conv = oracle::periodic_mean(
          [&](double y) { return k.force({x - y, 0, 0})[0] * 2 * std::cos(2 * pi * y); }, 64);
      CHECK(std::abs(df.force[i] - conv) < 1e-10);
    }
    mfl::HermiteField h(1.0, 1, 4);
    h.at(0, 0) = 1.0;
    for (double v : mfl::density_and_force(h, k, 16).force) CHECK(std::abs(v) < 1e-14);
  }

  TEST_CASE("pairings against phase-space quadrature") {
    const double beta = 1.5;
    const auto f0 = mfl::parse_observable("cos(1) + 0.5*sin(2)*He(1)", std::sqrt(beta));
    const auto field = mfl::project_initial(f0, beta, 2, 16);
    for (const char* text : {"cos(1)", "sin(2)*He(1)", "cos(1)*He(2) + sin(1)"}) {
      const auto phi = mfl::parse_observable(text, std::sqrt(beta));
      const double vmax = 12.0 / std::sqrt(beta);
      const double expect = oracle::trapezoid(
          [&](double v) {
            return oracle::periodic_mean([&](double x) { return phi({x, 0, 0}, {v, 0, 0}) * f0({x, 0, 0}, {v, 0, 0}); }, 16) *
                   oracle::gaussian_density(v, beta);
          },
          -vmax, vmax, 2000);
      CHECK(mfl::pairing(field, phi) == doctest::Approx(expect).epsilon(1e-9));
    }
  }

  TEST_CASE("free transport exact solution at t=0") {
    const auto f0 = mfl::parse_observable("cos(1)*He(1)", 1.0);
    const std::vector<mfl::PhasePoint> pts{{0.1, 0.5}, {0.7, -1.2}};
    const auto vals = mfl::free_transport_exact(f0, 1.0, 0.0, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
      CHECK(vals[i] == doctest::Approx(f0({pts[i].x, 0, 0}, {pts[i].v, 0, 0}) *
                                       oracle::gaussian_density(pts[i].v, 1.0)));
  }

  TEST_CASE("guards") {
    mfl::HermiteParams p;
    p.n_hermite = 512;
    CHECK_THROWS_AS(mfl::solve_hermite(mfl::cosine_kernel(), 1.0, mfl::Observable::cos_mode(1), 20.0, 1.0, p),
                    mfl::InstabilityError);
    CHECK_THROWS_AS(mfl::project_initial(mfl::Observable::hermite(40, 1.0), 1.0, 1, 32), std::invalid_argument);
    CHECK_THROWS_AS(mfl::project_initial(mfl::Observable::cos_mode(3), 1.0, 1, 32), std::invalid_argument);
  }
}
