#include <stdexcept>
#include <cmath>
#include <numbers>
#include <random>

#include <omp.h>

#include "doctest.h"
#include "mfl/dynamics.hpp"
#include "oracles.hpp"

using mfl::Point;
constexpr double pi = std::numbers::pi;

namespace {

mfl::ParticleState random_state(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  mfl::ParticleState s;
  s.dimension = d;
  for (int j = 0; j < n; ++j) {
    Point x{}, v{};
    for (int a = 0; a < d; ++a) {
      x[a] = u(rng);
      v[a] = g(rng);
    }
    s.positions.push_back(x);
    s.velocities.push_back(v);
  }
  return s;
}

double torus_gap(double a, double b) {
  const double d = a - b;
  return std::abs(d - std::round(d));
}

double max_energy_drift(const mfl::FourierKernel& k, mfl::ParticleState s, double dt, double t) {
  const double h0 = mfl::total_energy(s, k);
  mfl::VerletIntegrator vi(k, dt);
  double worst = 0.0;
  const int steps = static_cast<int>(std::lround(t / dt));
  for (int i = 0; i < steps; ++i) {
    vi.step(s);
    worst = std::max(worst, std::abs(mfl::total_energy(s, k) - h0));
  }
  return worst;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("free streaming without interaction") {
    auto s = random_state(5, 2, 1);
    const auto s0 = s;
    const auto zk = mfl::zero_kernel(2);
    mfl::VerletIntegrator vi(zk, 0.01);
    for (int i = 0; i < 100; ++i) vi.step(s);
    for (int j = 0; j < 5; ++j)
      for (int a = 0; a < 2; ++a) {
        CHECK(s.velocities[j][a] == s0.velocities[j][a]);
        CHECK(torus_gap(s.positions[j][a], s0.positions[j][a] + s0.velocities[j][a]) < 1e-12);
      }
    auto one = random_state(1, 1, 2);
    const auto one0 = one;
    const auto ck = mfl::cosine_kernel();
    mfl::VerletIntegrator vc(ck, 0.01);
    for (int i = 0; i < 100; ++i) vc.step(one);
    CHECK(one.velocities[0][0] == one0.velocities[0][0]);
  }

  TEST_CASE("one step against an independent RK4 integration") {
    // state y = (x1, x2, v1, v2); force on particle 1 is (1/2) K(x1 - x2)
    using Y = std::array<double, 4>;
    auto rhs = [](const Y& y) {
      const double f = 0.5 * 2 * pi * std::sin(2 * pi * (y[0] - y[1]));
      return Y{y[2], y[3], f, -f};
    };
    auto add = [](Y a, const Y& b, double c) {
      for (int i = 0; i < 4; ++i) a[i] += c * b[i];
      return a;
    };
    auto rk4 = [&](Y y, double dt) {
      const auto k1 = rhs(y), k2 = rhs(add(y, k1, dt / 2)), k3 = rhs(add(y, k2, dt / 2)),
                 k4 = rhs(add(y, k3, dt));
      for (int i = 0; i < 4; ++i) y[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      return y;
    };
    auto one_step_error = [&](const mfl::ParticleState& s, double dt) {
      const Y y = rk4({s.positions[0][0], s.positions[1][0], s.velocities[0][0], s.velocities[1][0]}, dt);
      const auto next = mfl::verlet_step(s, mfl::cosine_kernel(), dt);
      return std::max({torus_gap(next.positions[0][0], y[0]), torus_gap(next.positions[1][0], y[1]),
                       std::abs(next.velocities[0][0] - y[2]), std::abs(next.velocities[1][0] - y[3])});
    };
    mfl::ParticleState s;
    s.positions = {{0.1, 0, 0}, {0.35, 0, 0}};
    s.velocities = {{0.3, 0, 0}, {-0.2, 0, 0}};
    CHECK(one_step_error(s, 1e-3) < 1e-8);
    // local error is third order for arbitrary states
    const auto r = random_state(2, 1, 3);
    const double e1 = one_step_error(r, 1e-2), e2 = one_step_error(r, 5e-3);
    CHECK(e1 / e2 > 7.0);
    CHECK(e1 / e2 < 9.0);
  }

  TEST_CASE("time reversal") {
    const auto k = mfl::cosine_kernel();
    auto s = random_state(16, 1, 4);
    const auto s0 = s;
    mfl::VerletIntegrator vi(k, 1e-3);
    for (int i = 0; i < 1000; ++i) vi.step(s);
    for (auto& v : s.velocities) v[0] = -v[0];
    vi.reset(s);
    for (int i = 0; i < 1000; ++i) vi.step(s);
    double worst = 0.0;
    for (int j = 0; j < 16; ++j) {
      worst = std::max(worst, torus_gap(s.positions[j][0], s0.positions[j][0]));
      worst = std::max(worst, std::abs(s.velocities[j][0] + s0.velocities[j][0]));
    }
    CHECK(worst < 1e-8);
  }

  TEST_CASE("energy drift is second order and small") {
    const auto k = mfl::cosine_kernel();
    const auto s = random_state(16, 1, 5);
    const double a = max_energy_drift(k, s, 0.02, 1.0), b = max_energy_drift(k, s, 0.01, 1.0);
    CHECK(a / b > 3.0);
    CHECK(a / b < 5.0);
    const auto big = random_state(64, 1, 6);
    const double h0 = mfl::total_energy(big, k);
    CHECK(max_energy_drift(k, big, 1e-3, 2.0) / std::abs(h0) < 1e-5);
  }

  TEST_CASE("total energy values") {
    const auto k = mfl::cosine_kernel();
    mfl::ParticleState one;
    one.positions = {{0.3, 0, 0}};
    one.velocities = {{0, 0, 0}};
    CHECK(mfl::total_energy(one, k) == 0.0);
    mfl::ParticleState two;
    two.positions = {{0.0, 0, 0}, {0.25, 0, 0}};
    two.velocities = {{0, 0, 0}, {0, 0, 0}};
    CHECK(std::abs(mfl::total_energy(two, k)) < 1e-15);
  }

  TEST_CASE("momentum is conserved") {
    const auto k = mfl::riesz_kernel(2, 1.0, 3);
    auto s = random_state(20, 2, 7);
    auto momentum = [](const mfl::ParticleState& st, int a) {
      double p = 0.0;
      for (const auto& v : st.velocities) p += v[a];
      return p;
    };
    const double p0 = momentum(s, 0), p1 = momentum(s, 1);
    mfl::VerletIntegrator vi(k, 1e-3);
    for (int i = 0; i < 200; ++i) vi.step(s);
    CHECK(std::abs(momentum(s, 0) - p0) < 1e-12);
    CHECK(std::abs(momentum(s, 1) - p1) < 1e-12);
  }

  TEST_CASE("spectral forces agree with the pair sum and across threading") {
    const auto k = mfl::riesz_kernel(2, 1.0, 3);
    const auto s = random_state(40, 2, 8);
    std::vector<Point> a, b, c;
    mfl::compute_forces(k, s.positions, a);
    mfl::serial::compute_forces(k, s.positions, b);
    mfl::serial::compute_forces_pairwise(k, s.positions, c);
    for (int j = 0; j < 40; ++j)
      for (int d = 0; d < 2; ++d) {
        CHECK(a[j][d] == b[j][d]);
        CHECK(std::abs(b[j][d] - c[j][d]) < 1e-12);
      }
  }

  TEST_CASE("ensemble weights and centering") {
    const auto k = mfl::cosine_kernel();
    mfl::EnsembleParams p;
    CHECK_THROWS_AS(mfl::make_fluctuation_ensemble(k, 4, 1.0, mfl::Observable::constant(1.0), 10, p, 1),
                    std::invalid_argument);
    CHECK_NOTHROW(mfl::make_fluctuation_ensemble(k, 4, 1.0, mfl::Observable::hermite(2, 1.0), 10, p, 1));
    CHECK_THROWS_AS(
        mfl::make_fluctuation_ensemble(k, 4, 1.0, mfl::parse_observable("cos(1) + 0.5", 1.0), 10, p, 1),
        std::invalid_argument);
  }

  TEST_CASE("zero initial fluctuation gives zero weights") {
    const auto ens = mfl::make_fluctuation_ensemble(mfl::cosine_kernel(), 4, 1.0,
                                                    mfl::Observable::zero(), 20, {}, 2);
    for (double w : ens.weights) CHECK(w == 0.0);
  }

  TEST_CASE("weight variance grows linearly in N") {
    const auto k = mfl::cosine_kernel();
    std::vector<double> ln, lv;
    for (int n : {8, 32, 128}) {
      const auto ens = mfl::make_fluctuation_ensemble(k, n, 1.0, mfl::Observable::cos_mode(1), 3000, {}, 3);
      double m = 0.0, v = 0.0;
      for (double w : ens.weights) m += w;
      m /= ens.weights.size();
      for (double w : ens.weights) v += (w - m) * (w - m);
      v /= ens.weights.size() - 1;
      CHECK(std::abs(m) < 4 * std::sqrt(v / ens.weights.size()));
      ln.push_back(std::log(n));
      lv.push_back(std::log(v));
    }
    const auto fit = mfl::least_squares(ln, lv);
    CHECK(fit.slope > 0.7);
    CHECK(fit.slope < 1.3);
  }

  TEST_CASE("one-particle marginal for N=2 against quadrature") {
    const double beta = 1.0;
    const auto k = mfl::cosine_kernel();
    const auto ens = mfl::make_fluctuation_ensemble(k, 2, beta, mfl::Observable::cos_mode(1), 20000, {}, 4);
    const auto snaps = mfl::simulate(ens, k, 0.0, 0.01, {0.0});
    const auto e = mfl::weighted_observable(snaps, 0, mfl::Observable::cos_mode(1));
    // E[(c1 + c2) c1] = 1/2 + (1/2) E[cos 2 pi (x1 - x2)] under exp(-(beta/2) cos)
    auto wgt = [&](double y) { return std::exp(-0.5 * beta * std::cos(2 * pi * y)); };
    const double z = oracle::periodic_mean(wgt, 256);
    const double c = oracle::periodic_mean([&](double y) { return std::cos(2 * pi * y) * wgt(y); }, 256) / z;
    const double expect = 0.5 + 0.5 * c;
    CHECK(std::abs(e.value - expect) < 3 * e.stderr_);
    const auto one = mfl::weighted_observable(snaps, 0, mfl::Observable::constant(1.0));
    CHECK(std::abs(one.value) < 4 * one.stderr_ + 1e-12);
  }

  TEST_CASE("simulation to T=0 returns the initial ensemble") {
    const auto k = mfl::cosine_kernel();
    const auto ens = mfl::make_fluctuation_ensemble(k, 4, 1.0, mfl::Observable::cos_mode(1), 5, {}, 5);
    const auto snaps = mfl::simulate(ens, k, 0.0, 0.01, {0.0});
    for (int r = 0; r < 5; ++r) CHECK(snaps.states[0][r].positions == ens.replicas[r].positions);
  }

  TEST_CASE("ensembles are identical across thread counts") {
    const auto k = mfl::cosine_kernel();
    auto run = [&](int threads) {
      omp_set_num_threads(threads);
      const auto ens = mfl::make_fluctuation_ensemble(k, 8, 1.0, mfl::Observable::cos_mode(1), 12, {}, 6);
      return mfl::simulate(ens, k, 0.2, 0.01, {0.2});
    };
    const auto a = run(1), b = run(3);
    omp_set_num_threads(1);
    CHECK(a.weights == b.weights);
    for (int r = 0; r < 12; ++r) {
      CHECK(a.states[0][r].positions == b.states[0][r].positions);
      CHECK(a.states[0][r].velocities == b.states[0][r].velocities);
    }
  }
}
