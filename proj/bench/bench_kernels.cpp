// Serial reference implementations against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "mfl/cluster.hpp"
#include "mfl/dynamics.hpp"
#include "mfl/gibbs.hpp"
#include "mfl/meanfield.hpp"

namespace {

std::vector<mfl::Point> random_positions(int n, int d) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<mfl::Point> x(n);
  for (auto& p : x)
    for (int a = 0; a < d; ++a) p[a] = u(rng);
  return x;
}

void BM_ForcesPairwise(benchmark::State& state) {
  const auto k = mfl::riesz_kernel(1, 0.3, 8);
  const auto x = random_positions(static_cast<int>(state.range(0)), 1);
  std::vector<mfl::Point> f;
  for (auto _ : state) {
    mfl::serial::compute_forces_pairwise(k, x, f);
    benchmark::DoNotOptimize(f.data());
  }
}
void BM_ForcesSpectralSerial(benchmark::State& state) {
  const auto k = mfl::riesz_kernel(1, 0.3, 8);
  const auto x = random_positions(static_cast<int>(state.range(0)), 1);
  std::vector<mfl::Point> f;
  for (auto _ : state) {
    mfl::serial::compute_forces(k, x, f);
    benchmark::DoNotOptimize(f.data());
  }
}
void BM_ForcesSpectralParallel(benchmark::State& state) {
  const auto k = mfl::riesz_kernel(1, 0.3, 8);
  const auto x = random_positions(static_cast<int>(state.range(0)), 1);
  std::vector<mfl::Point> f;
  for (auto _ : state) {
    mfl::compute_forces(k, x, f);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_ForcesPairwise)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_ForcesSpectralSerial)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_ForcesSpectralParallel)->Arg(64)->Arg(256)->Arg(512);

void BM_ExactZSerial(benchmark::State& state) {
  const auto k = mfl::cosine_kernel(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(mfl::serial::exact_z_small_n(k, 3, 1.0, static_cast<int>(state.range(0))));
}
void BM_ExactZParallel(benchmark::State& state) {
  const auto k = mfl::cosine_kernel(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(mfl::exact_z_small_n(k, 3, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExactZSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_ExactZParallel)->Arg(256)->Arg(1024);

void BM_SampleGridSerial(benchmark::State& state) {
  const auto k = mfl::riesz_kernel(2, 0.5, 8);
  for (auto _ : state) benchmark::DoNotOptimize(mfl::serial::sample_grid(k, 128));
}
void BM_SampleGridParallel(benchmark::State& state) {
  const auto k = mfl::riesz_kernel(2, 0.5, 8);
  for (auto _ : state) benchmark::DoNotOptimize(k.sample_grid(128));
}
BENCHMARK(BM_SampleGridSerial);
BENCHMARK(BM_SampleGridParallel);

void BM_PhiSerial(benchmark::State& state) {
  const auto m = mfl::cluster::mayer_functions(mfl::cosine_kernel(1.0), 4, 0.5, 64);
  for (auto _ : state) benchmark::DoNotOptimize(mfl::cluster::serial::phi_k(m, 4));
}
void BM_PhiParallel(benchmark::State& state) {
  const auto m = mfl::cluster::mayer_functions(mfl::cosine_kernel(1.0), 4, 0.5, 64);
  for (auto _ : state) benchmark::DoNotOptimize(mfl::cluster::phi_k(m, 4));
}
BENCHMARK(BM_PhiSerial);
BENCHMARK(BM_PhiParallel);

void BM_ApplySSerial(benchmark::State& state) {
  const mfl::ConfinedGrid grid(mfl::ConfinedProblem{});
  const auto rho = mfl::reference_measure(grid);
  for (auto _ : state) benchmark::DoNotOptimize(mfl::serial::apply_S(grid, rho));
}
void BM_ApplySParallel(benchmark::State& state) {
  const mfl::ConfinedGrid grid(mfl::ConfinedProblem{});
  const auto rho = mfl::reference_measure(grid);
  for (auto _ : state) benchmark::DoNotOptimize(mfl::apply_S(grid, rho));
}
BENCHMARK(BM_ApplySSerial);
BENCHMARK(BM_ApplySParallel);

}  // namespace

BENCHMARK_MAIN();
