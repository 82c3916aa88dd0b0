#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mfl/correlations.hpp"

constexpr double pi = std::numbers::pi;

namespace {

mfl::PhaseGrid small_grid(int nx = 6, int nv = 5) {
  mfl::PhaseGrid g;
  g.nx = nx;
  g.nv = nv;
  g.beta = 1.0;
  return g;
}

// Symmetrized positive random density on the grid.
mfl::GridDensity random_symmetric(const mfl::PhaseGrid& grid, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  mfl::GridDensity raw(n, grid);
  for (auto& v : raw.values) v = u(rng);
  mfl::GridDensity out(n, grid);
  const std::size_t p = grid.points();
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    std::vector<std::size_t> ids(n);
    std::size_t r = idx;
    for (int i = n - 1; i >= 0; --i) {
      ids[i] = r % p;
      r /= p;
    }
    double prod = 1.0;
    for (auto id : ids) prod *= raw.reference[id];
    std::sort(ids.begin(), ids.end());
    double sum = 0.0;
    int count = 0;
    do {
      std::size_t j = 0;
      for (auto id : ids) j = j * p + id;
      sum += raw.values[j];
      ++count;
    } while (std::next_permutation(ids.begin(), ids.end()));
    out.values[idx] = prod * sum / count;
  }
  const double z = out.integral();
  for (auto& v : out.values) v /= z;
  return out;
}

double max_diff(const mfl::GridDensity& a, const mfl::GridDensity& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_SUITE("correlations") {
  TEST_CASE("centered projection") {
    const auto g = small_grid();
    const auto m = mfl::tabulate(g, 1, [](auto&, auto&) { return 1.0; });
    mfl::GridDensity mw(1, g);
    mw.values = mw.reference;
    CHECK(mfl::max_abs(mfl::project_centered(mw)) < 1e-12);
    auto cosm = mw;
    auto onepc = mw;
    for (std::size_t q = 0; q < mw.size(); ++q) {
      cosm.values[q] = std::cos(2 * pi * g.x(q)) * mw.reference[q];
      onepc.values[q] = mw.reference[q] + cosm.values[q];
    }
    CHECK(max_diff(mfl::project_centered(cosm), cosm) < 1e-12);
    CHECK(max_diff(mfl::project_centered(onepc), cosm) < 1e-12);
    CHECK(m.integral() > 0);
  }

  TEST_CASE("hoeffding components of simple densities") {
    const auto g = small_grid();
    for (int n : {2, 3}) {
      const auto product = mfl::fluctuation_density(g, n, mfl::Observable::constant(1.0));
      // constant g gives N * M^{(x)N}: no centered components beyond m = 0
      for (int m = 1; m <= n; ++m) CHECK(mfl::max_abs(mfl::hoeffding_exact(product, m)) < 1e-12);
      const auto fl = mfl::fluctuation_density(g, n, mfl::Observable::cos_mode(1));
      auto h1 = mfl::hoeffding_exact(fl, 1);
      mfl::GridDensity expect(1, g);
      for (std::size_t q = 0; q < expect.size(); ++q)
        expect.values[q] = std::cos(2 * pi * g.x(q)) * expect.reference[q];
      CHECK(max_diff(h1, expect) < 1e-10);
      CHECK(mfl::max_abs(mfl::hoeffding_exact(fl, 2)) < 1e-10);
    }
  }

  TEST_CASE("inclusion-exclusion and tensor projection agree") {
    const auto g = small_grid(4, 4);
    for (int n : {2, 3}) {
      const auto f = random_symmetric(g, n, 30 + n);
      for (int m = 0; m <= n; ++m)
        CHECK(max_diff(mfl::hoeffding_exact(f, m), mfl::hoeffding_tensor(f, m)) < 1e-10);
    }
    mfl::GridDensity four(4, small_grid(2, 2));
    CHECK_THROWS_AS(mfl::hoeffding_exact(four, 1), std::invalid_argument);
  }

  TEST_CASE("orthogonality identity") {
    const auto g = small_grid(4, 4);
    const auto prod = mfl::fluctuation_density(g, 2, mfl::Observable::constant(0.5));
    auto o = mfl::orthogonality_check(prod);
    CHECK(o.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(o.rhs == doctest::Approx(1.0).epsilon(1e-12));
    const auto corr = mfl::tabulate(g, 2, [](const auto& x, const auto&) {
      return 1.0 + 0.1 * std::cos(2 * pi * x[0]) * std::cos(2 * pi * x[1]);
    });
    auto weighted = corr;
    const std::size_t p = g.points();
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        weighted.values[i * p + j] *= weighted.reference[i] * weighted.reference[j];
    o = mfl::orthogonality_check(weighted);
    CHECK(o.lhs == doctest::Approx(o.rhs).epsilon(1e-8));
    o = mfl::orthogonality_check(mfl::gibbs_fluctuation_density(g, 2, mfl::cosine_kernel(), mfl::Observable::cos_mode(1)));
    CHECK(o.lhs == doctest::Approx(o.rhs).epsilon(1e-8));
    o = mfl::orthogonality_check(random_symmetric(g, 3, 7));
    CHECK(o.lhs == doctest::Approx(o.rhs).epsilon(1e-8));
  }

  TEST_CASE("bootstrap standard error") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss;
    std::vector<double> xs(4000);
    for (auto& x : xs) x = gauss(rng);
    CHECK(mfl::bootstrap_stderr(xs, 256, 3) ==
          doctest::Approx(std::sqrt(mfl::variance(xs) / xs.size())).epsilon(0.2));
  }

  TEST_CASE("pair pairing with zero initial data is zero") {
    const auto k = mfl::cosine_kernel();
    const auto ens = mfl::make_fluctuation_ensemble(k, 4, 1.0, mfl::Observable::zero(), 50, {}, 1);
    const auto snaps = mfl::simulate(ens, k, 0.1, 0.01, {0.1});
    const auto pp = mfl::pair_pairing_estimate(snaps, 0, mfl::Observable::cos_mode(1), mfl::Observable::cos_mode(1));
    CHECK(pp.value == 0.0);
    CHECK(mfl::vlasov_remainder_estimate(snaps, 0, mfl::Observable::cos_times_velocity(1, 1.0), k).value == 0.0);
    CHECK(mfl::vlasov_remainder_estimate(snaps, 0, mfl::Observable::cos_times_velocity(1, 1.0),
                                         mfl::zero_kernel(1)).value == 0.0);
  }

  TEST_CASE("pair pairing and remainder at t=0 against grid quadrature, N=2") {
    const auto k = mfl::cosine_kernel();
    const double beta = 1.0;
    mfl::PhaseGrid g;
    g.nx = 16;
    g.nv = 8;
    g.beta = beta;
    const auto f0 = mfl::Observable::cos_mode(1);
    const auto h2 = mfl::hoeffding_exact(mfl::gibbs_fluctuation_density(g, 2, k, f0), 2);
    const auto psi = mfl::Observable::cos_mode(1), chi = mfl::Observable::cos_mode(2);
    const double grid_value = mfl::grid_pairing(h2, psi, chi);

    const auto test = mfl::Observable::cos_times_velocity(1, beta);
    const std::size_t p = g.points();
    double grid_r = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        grid_r += test.dv({g.x(i), 0, 0}, {g.v(i), 0, 0}) * k.force({g.x(i) - g.x(j), 0, 0})[0] *
                  h2.values[i * p + j];
    grid_r *= g.weight() * g.weight();

    const auto ens = mfl::make_fluctuation_ensemble(k, 2, beta, f0, 40000, {}, 12);
    const auto snaps = mfl::simulate(ens, k, 0.0, 0.01, {0.0});
    const auto pp = mfl::pair_pairing_estimate(snaps, 0, psi, chi);
    CHECK(std::abs(pp.value - grid_value) < 3 * pp.stderr_);
    const auto r = mfl::vlasov_remainder_estimate(snaps, 0, test, k);
    CHECK(std::abs(r.value - grid_r) < 3 * r.stderr_);
    MESSAGE("pairing grid " << grid_value << " mc " << pp.value << " +- " << pp.stderr_);
    MESSAGE("remainder grid " << grid_r << " mc " << r.value << " +- " << r.stderr_);
  }
}
