// Acceptance runner: `acceptance <n>` evaluates criterion n (1..13) and
// prints one pass/fail line; `acceptance all` runs every criterion.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "mfl/cluster.hpp"
#include "mfl/config.hpp"
#include "mfl/correlations.hpp"
#include "mfl/experiments.hpp"
#include "mfl/gibbs.hpp"
#include "mfl/meanfield.hpp"
#include "mfl/vlasov.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

mfl::ExperimentConfig config(const std::string& file) {
  return mfl::load_config(std::string(MFL_CONFIG_DIR) + "/" + file);
}

const mfl::Check* find_check(const mfl::ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool check_passed(const mfl::ExperimentReport& r, const std::string& name, std::string& detail) {
  const auto* c = find_check(r, name);
  if (!c) {
    detail += name + ": missing; ";
    return false;
  }
  detail += name + (c->passed ? " ok (" : " failed (") + c->detail + "); ";
  return c->passed;
}

Outcome criterion1() {
  Stopwatch sw;
  const auto k = mfl::cosine_kernel();
  const double exact = mfl::exact_z_small_n(k, 2, 1.0, 1 << 14).z();
  const double oracle_i0 = oracle::bessel_i(0, 0.5);
  mfl::McmcParams p;
  p.burn_in_sweeps = 1000;
  p.sample_sweeps = 20000;
  const auto th = mfl::estimate_log_z_thermo(k, 2, 1.0, 8, p, mfl::item_seed(101, 0));
  const double z_th = th.z(), z_se = z_th * th.stderr_;
  const bool exact_ok = std::abs(exact - oracle_i0) <= 1e-6 && std::abs(exact - 1.063483) <= 1e-6;
  const bool th_ok = std::abs(z_th - exact) <= 3 * z_se;
  const double t = sw.seconds();
  return {exact_ok && th_ok && t < 60,
          "exact Z = " + fmt(exact, 10) + " (I0(0.5) = " + fmt(oracle_i0, 10) + "), thermo Z = " +
              fmt(z_th, 7) + " +- " + fmt(z_se, 2) + ", " + fmt(t, 3) + " s"};
}

Outcome criterion2() {
  Stopwatch sw;
  const auto k = mfl::cosine_kernel();
  const double lim = mfl::limit_z(k, 1.0).value;
  const double gauss = mfl::limit_z(k, 1.0, mfl::LimitConvention::gaussian_fluctuation).value;
  const bool value_ok = std::abs(lim - 1.055215) <= 1e-6;
  const auto report = mfl::run_limit(config("limit.ini"));
  std::string trend;
  const bool trend_ok = check_passed(report, "trend_as_published", trend);
  std::string corrected;
  check_passed(report, "trend_gaussian_fluctuation", corrected);
  std::string zs;
  for (const auto& row : report.tables[1].rows) zs += "Z(" + row[0] + ") = " + fmt(std::stod(row[2]), 7) + " +- " + fmt(std::stod(row[3]), 2) + " ";
  const double t = sw.seconds();
  return {value_ok && trend_ok && t < 600,
          "limit_Z = " + fmt(lim, 8) + " vs 1.055215 (diff " + fmt(lim - 1.055215, 3) + "); " + zs +
              "; " + trend + "informational: gaussian-fluctuation limit " + fmt(gauss, 8) + ", " +
              corrected + fmt(t, 3) + " s"};
}

Outcome criterion3() {
  Stopwatch sw;
  struct Entry {
    std::string name;
    mfl::FourierKernel kernel;
  };
  const std::vector<Entry> kernels{{"cosine", mfl::cosine_kernel()},
                                   {"log d=1", mfl::log_kernel(1, 8)},
                                   {"riesz d=2 s=1", mfl::riesz_kernel(2, 1.0, 3)}};
  mfl::McmcParams p;
  p.burn_in_sweeps = 300;
  p.sample_sweeps = 3000;
  int total = 0, fails = 0;
  std::string worst;
  double worst_margin = 1e300;
  std::uint64_t item = 0;
  for (const auto& e : kernels)
    for (int n : {2, 3, 8, 32})
      for (double beta : {0.5, 1.0, 2.0}) {
        mfl::PartitionEstimate est;
        bool exact = e.kernel.dimension() == 1 && n <= 3;
        est = exact ? mfl::exact_z_small_n(e.kernel, n, beta, 1024)
                    : mfl::estimate_log_z_thermo(e.kernel, n, beta, 6, p, mfl::item_seed(303, item++));
        const double z = est.z(), se = z * est.stderr_;
        const double margin = exact ? z - 1.0 : (z - (1.0 - 3 * se));
        ++total;
        if (margin < 0) ++fails;
        if (margin < worst_margin) {
          worst_margin = margin;
          worst = e.name + " N=" + std::to_string(n) + " beta=" + fmt(beta, 3) + " Z=" + fmt(z, 7);
        }
      }
  return {fails == 0 && total >= 20,
          std::to_string(total - fails) + "/" + std::to_string(total) +
              " estimates satisfy Z >= 1 (exact) or Z >= 1 - 3 stderr (MC); tightest: " + worst +
              ", " + fmt(sw.seconds(), 3) + " s"};
}

Outcome criterion4() {
  Stopwatch sw;
  const auto k = mfl::cosine_kernel();
  double worst = 0.0;
  for (int n : {2, 3})
    for (double p : {2.0, 3.0})
      for (double beta : {0.5, 1.0}) {
        const auto m = mfl::moment_identity_check(k, n, beta, p, n == 2 ? 4096 : 512);
        worst = std::max(worst, std::abs(m.lhs - m.rhs));
      }
  const double rhs_oracle = oracle::bessel_i(0, 1.0) / std::pow(oracle::bessel_i(0, 0.5), 2);
  const double rhs = mfl::moment_identity_check(k, 2, 1.0, 2.0).rhs;
  const bool ok = worst <= 1e-8 && std::abs(rhs - rhs_oracle) <= 1e-10 && sw.seconds() < 60;
  return {ok, "max |lhs - rhs| = " + fmt(worst, 3) + " over N in {2,3}, p in {2,3}, beta in {0.5,1}; " +
                  "N=2 p=2 beta=1 rhs " + fmt(rhs, 10) + " vs Bessel " + fmt(rhs_oracle, 10) + ", " +
                  fmt(sw.seconds(), 3) + " s"};
}

Outcome criterion5() {
  Stopwatch sw;
  namespace cl = mfl::cluster;
  double worst = 0.0;
  for (int k = 2; k <= 5; ++k) {
    mfl::Engine rng(mfl::item_seed(505, k));
    for (int t = 0; t < 100; ++t) {
      const auto w = cl::EdgeWeights::random(k, rng);
      worst = std::max(worst, std::abs(cl::penrose_tree_sum(w) - cl::connected_graph_sum(w)));
    }
  }
  bool cayley = true;
  for (int k = 2; k <= 7; ++k) {
    std::int64_t expect = 1;
    for (int i = 0; i < k - 2; ++i) expect *= k;
    cayley = cayley && static_cast<std::int64_t>(cl::enumerate_trees(k).size()) == expect;
  }
  const bool counts = cl::enumerate_connected_graphs(4).size() == 38 &&
                      cl::enumerate_connected_graphs(5).size() == 728;
  return {worst <= 1e-12 && cayley && counts && sw.seconds() < 60,
          "max |tree - graph| = " + fmt(worst, 3) + " over 400 matrices; Cayley k<=7 " +
              (cayley ? "exact" : "wrong") + "; " + fmt(sw.seconds(), 3) + " s"};
}

Outcome criterion6() {
  Stopwatch sw;
  namespace cl = mfl::cluster;
  const auto k = mfl::cosine_kernel();
  const double beta = 0.5;
  const int n = 3;
  const auto mayer = cl::mayer_functions(k, n, beta, 512);
  double log_zh = 0.0;
  for (int kk = 2; kk <= n; ++kk)
    log_zh += cl::binomial(n, kk) * cl::phi_k_refined(k, n, beta, kk, 16, 1e-12, 512).graph_route;
  const double z_cluster = std::pow(1 + mayer.c0, cl::binomial(n, 2)) * std::exp(log_zh);
  const double z_exact = mfl::exact_z_small_n(k, n, beta, 1024).z();
  const double rel = std::abs(z_cluster - z_exact) / z_exact;
  return {rel <= 1e-6 && sw.seconds() < 120,
          "cluster Z = " + fmt(z_cluster, 12) + ", exact Z = " + fmt(z_exact, 12) + ", relative error " +
              fmt(rel, 3) + ", " + fmt(sw.seconds(), 3) + " s"};
}

Outcome criterion7() {
  mfl::PhaseGrid g;
  g.nx = 4;
  g.nv = 4;
  g.beta = 1.0;
  std::vector<std::pair<std::string, mfl::GridDensity>> dens;
  dens.emplace_back("gibbs N=2 cos", mfl::gibbs_fluctuation_density(g, 2, mfl::cosine_kernel(), mfl::Observable::cos_mode(1)));
  dens.emplace_back("gibbs N=3 cos*v", mfl::gibbs_fluctuation_density(g, 3, mfl::cosine_kernel(),
                                                                      mfl::Observable::cos_times_velocity(1, 1.0)));
  dens.emplace_back("correlated N=2", mfl::tabulate(g, 2, [&](const auto& x, const auto& v) {
    const double m = oracle::gaussian_density(v[0], 1.0) * oracle::gaussian_density(v[1], 1.0);
    return m * (1 + 0.3 * std::cos(2 * M_PI * (x[0] - x[1])) + 0.2 * v[0] * v[1]);
  }));
  dens.emplace_back("correlated N=3", mfl::tabulate(g, 3, [&](const auto& x, const auto& v) {
    double m = 1.0;
    for (int i = 0; i < 3; ++i) m *= oracle::gaussian_density(v[i], 1.0);
    return m * (1 + 0.2 * std::cos(2 * M_PI * (x[0] + x[1] + x[2])) + 0.1 * v[0] * v[1] * v[2]);
  }));
  double worst_orth = 0.0;
  for (const auto& [name, f] : dens) {
    const auto o = mfl::orthogonality_check(f);
    worst_orth = std::max(worst_orth, std::abs(o.lhs - o.rhs) / std::max(1.0, std::abs(o.rhs)));
  }
  double worst_h = 0.0;
  for (int n : {2, 3})
    for (const char* text : {"cos(1)", "cos(1)*He(1) + sin(1)", "He(2)"}) {
      const auto f = mfl::fluctuation_density(g, n, mfl::parse_observable(text, 1.0));
      for (int m = 2; m <= n; ++m) worst_h = std::max(worst_h, mfl::max_abs(mfl::hoeffding_exact(f, m)));
    }
  return {worst_orth <= 1e-8 && worst_h <= 1e-10,
          "orthogonality max relative gap " + fmt(worst_orth, 3) + " on " + std::to_string(dens.size()) +
              " densities; product-form max |H_m|, m>=2: " + fmt(worst_h, 3)};
}

Outcome criterion8() {
  Stopwatch sw;
  auto c = config("vlasov.ini");
  const auto r = mfl::run_vlasov_check(c);
  std::string detail;
  bool ok = check_passed(r, "cross_method", detail);
  ok = check_passed(r, "free_transport", detail) && ok;
  ok = check_passed(r, "conservation", detail) && ok;
  // independent oracle for the free density mode: velocity quadrature
  const auto f0 = mfl::Observable::cos_mode(1);
  mfl::HermiteParams hp;
  hp.n_hermite = c.n_hermite_free;
  const auto free = mfl::solve_hermite(mfl::zero_kernel(1), 1.0, f0, 2.0, 0.01, hp);
  double sq = 0.0;
  for (std::size_t s = 0; s < free.times.size(); ++s) {
    const double t = free.times[s];
    const double q = oracle::trapezoid([&](double v) {
      return 0.5 * oracle::gaussian_density(v, 1.0) * std::cos(2 * M_PI * v * t);
    }, -12, 12, 6000);
    sq += std::norm(free.rho[1][s] - q);
  }
  const double oracle_l2 = std::sqrt(2 * sq / free.times.size());
  ok = ok && oracle_l2 <= 1e-4 && sw.seconds() < 120;
  return {ok, detail + "free mode vs velocity quadrature rms " + fmt(oracle_l2, 3) + ", " +
                  fmt(sw.seconds(), 3) + " s"};
}

Outcome criterion9() {
  const auto r = mfl::run_dynamics_check(config("dynamics.ini"));
  std::string detail;
  bool ok = check_passed(r, "reversibility", detail);
  ok = check_passed(r, "energy_drift_order", detail) && ok;
  ok = check_passed(r, "momentum_conservation", detail) && ok;
  std::string ratios;
  for (const auto& row : r.tables[0].rows) ratios += "N=" + row[0] + " ratio " + fmt(std::stod(row[5]), 5) + " ";
  return {ok, detail + ratios};
}

Outcome criterion10() {
  Stopwatch sw;
  const auto r = mfl::run_theorem1(config("theorem1.ini"));
  std::string detail;
  const bool ok = check_passed(r, "discrepancy_trend", detail);
  return {ok && sw.seconds() < 1800, detail + fmt(sw.seconds(), 4) + " s"};
}

Outcome criterion11() {
  Stopwatch sw;
  const auto r = mfl::run_correlations_decay(config("correlations.ini"));
  std::string detail;
  const bool ok = check_passed(r, "pair_slope_window", detail);
  for (const auto& [name, v] : r.metrics) detail += name + " = " + fmt(v, 4) + "; ";
  return {ok && sw.seconds() < 1800, detail + fmt(sw.seconds(), 4) + " s"};
}

Outcome criterion12() {
  Stopwatch sw;
  const auto c = config("meanfield.ini");
  const auto r = mfl::run_meanfield(c);
  const auto& m = r.metrics;
  const mfl::ConfinedGrid grid(c.meanfield);
  const auto fp = mfl::solve_fixed_point(grid, c.tol, c.max_iter);
  double max_ratio = 0.0;
  for (double q : fp.contraction_ratios) max_ratio = std::max(max_ratio, q);
  const auto sweep = mfl::eta_norm_monotonicity(c.meanfield, c.q, c.eta_betas);
  const bool ok = m.at("residual") < 1e-10 && max_ratio < 1.0 && m.at("geometric_r_squared") > 0.99 &&
                  sweep.nondecreasing && m.at("cancellation") < 1e-7 && sw.seconds() < 60;
  return {ok, "residual " + fmt(m.at("residual"), 3) + ", max ratio " + fmt(max_ratio, 3) + ", R^2 " +
                  fmt(m.at("geometric_r_squared"), 8) + ", eta norm monotone " +
                  (sweep.nondecreasing ? "yes" : "no") + ", cancellation " + fmt(m.at("cancellation"), 3) +
                  ", " + fmt(sw.seconds(), 3) + " s"};
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") {
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      out[e.path().filename().string()] = ss.str();
    }
  return out;
}

// Small versions of every experiment.
std::vector<mfl::ExperimentConfig> determinism_configs() {
  std::vector<mfl::ExperimentConfig> out;
  auto add = [&](const std::string& file, const std::function<void(mfl::ExperimentConfig&)>& shrink) {
    auto c = config(file);
    shrink(c);
    out.push_back(c);
  };
  add("partition.ini", [](auto& c) {
    c.n_list = {2, 8};
    c.betas = {0.5, 1.0};
    c.mcmc.sample_sweeps = 400;
    c.mcmc.burn_in_sweeps = 100;
  });
  add("limit.ini", [](auto& c) {
    c.n_list = {2, 8};
    c.mcmc.sample_sweeps = 400;
    c.mcmc.burn_in_sweeps = 100;
  });
  add("cluster.ini", [](auto& c) {
    c.n_list = {2, 3};
    c.cluster_trials = 10;
  });
  add("dynamics.ini", [](auto& c) {
    c.n_list = {8};
    c.t_end = 0.1;
    c.dt = 0.01;
  });
  add("theorem1.ini", [](auto& c) {
    c.n_list = {4, 8};
    c.replicas = 64;
    c.t_end = 0.2;
    c.times = {0.1, 0.2};
    c.dt = 0.01;
    c.n_hermite = 64;
    c.ensemble.chains = 4;
  });
  add("correlations.ini", [](auto& c) {
    c.n_list = {4, 8};
    c.replicas = 64;
    c.t_end = 0.2;
    c.times = {0.1, 0.2};
    c.dt = 0.01;
    c.ensemble.chains = 4;
    c.bootstrap = 32;
  });
  add("vlasov.ini", [](auto& c) {
    c.vlasov_t_end = 0.5;
    c.dt = 0.01;
    c.n_hermite = 64;
    c.n_hermite_free = 32;
  });
  add("meanfield.ini", [](auto& c) { c.meanfield.grid_points = 101; });
  return out;
}

Outcome criterion13() {
  Stopwatch sw;
  const fs::path root = fs::temp_directory_path() / "mfl_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0;
  std::string mismatch;
  for (auto c : determinism_configs()) {
    std::map<std::string, std::string> first;
    int run = 0;
    for (int workers : {1, 3, 1}) {
      c.workers = workers;
      c.out_dir = (root / (c.experiment + "-" + std::to_string(run++))).string();
      mfl::run_and_emit(c);
      const auto files = read_csvs(c.out_dir);
      if (first.empty()) {
        first = files;
        continue;
      }
      if (files != first) mismatch += c.experiment + " (workers " + std::to_string(workers) + ") ";
      compared += static_cast<int>(files.size());
    }
  }
  omp_set_num_threads(1);
  fs::remove_all(root);
  return {mismatch.empty() && compared > 0,
          std::to_string(compared) + " CSV files compared across reruns with 1 and 3 workers for all 8 experiments" +
              (mismatch.empty() ? "" : "; mismatch: " + mismatch) + ", " + fmt(sw.seconds(), 3) + " s"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& registry() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> r{
      {"partition exactness", criterion1},      {"limit formula", criterion2},
      {"Jensen lower bound", criterion3},       {"moment identity", criterion4},
      {"Penrose identity", criterion5},         {"cluster reconstruction", criterion6},
      {"Hoeffding orthogonality", criterion7},  {"Vlasov cross-validation", criterion8},
      {"dynamics quality", criterion9},         {"marginal convergence surrogate", criterion10},
      {"pair-correlation decay", criterion11},  {"mean-field fixed point", criterion12},
      {"determinism", criterion13}};
  return r;
}

bool run_one(int i) {
  const auto& [name, fn] = registry().at(i - 1);
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::cout << (o.passed ? "[PASS]" : "[FAIL]") << " criterion " << i << " (" << name << "): " << o.detail
            << std::endl;
  return o.passed;
}

}  // namespace

int main(int argc, char** argv) {
  omp_set_num_threads(1);
  if (argc != 2) {
    std::cerr << "usage: acceptance <1..13 | all>\n";
    return 2;
  }
  const std::string arg = argv[1];
  if (arg == "all") {
    bool ok = true;
    for (int i = 1; i <= static_cast<int>(registry().size()); ++i) ok = run_one(i) && ok;
    return ok ? 0 : 1;
  }
  const int i = std::atoi(arg.c_str());
  if (i < 1 || i > static_cast<int>(registry().size())) {
    std::cerr << "unknown criterion " << arg << "\n";
    return 2;
  }
  return run_one(i) ? 0 : 1;
}
