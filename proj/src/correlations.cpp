#include "mfl/correlations.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mfl/rng.hpp"

namespace mfl {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void decode(std::size_t idx, int m, std::size_t p, std::vector<int>& out) {
  out.resize(m);
  for (int i = m - 1; i >= 0; --i) {
    out[i] = static_cast<int>(idx % p);
    idx /= p;
  }
}

double weighted_sum(const std::vector<double>& values, double weight_power) {
  return pairwise_sum(values) * weight_power;
}

}  // namespace

double PhaseGrid::v_limit() const { return vmax > 0 ? vmax : 6.0 / std::sqrt(beta); }

double PhaseGrid::x(int p) const { return static_cast<double>(p / nv) / nx; }

double PhaseGrid::v(int p) const {
  const double vm = v_limit();
  return -vm + (p % nv) * (2.0 * vm / (nv - 1));
}

double PhaseGrid::weight() const { return (2.0 * v_limit() / (nv - 1)) / nx; }

std::vector<double> PhaseGrid::maxwellian() const {
  std::vector<double> g(nv);
  for (int i = 0; i < nv; ++i) {
    const double vv = v(i);
    g[i] = std::exp(-0.5 * beta * vv * vv);
  }
  const double dv = 2.0 * v_limit() / (nv - 1);
  const double norm = pairwise_sum(g) * dv;
  std::vector<double> out(points());
  for (int p = 0; p < points(); ++p) out[p] = g[p % nv] / norm;
  return out;
}

GridDensity::GridDensity(int m_, const PhaseGrid& grid_)
    : m(m_), grid(grid_), values(ipow(grid_.points(), m_), 0.0), reference(grid_.maxwellian()) {
  if (grid.nx < 1 || grid.nv < 2 || grid.nx > 32 || grid.nv > 32)
    throw std::invalid_argument("GridDensity: need 1 <= nx <= 32 and 2 <= nv <= 32");
  if (!(grid.beta > 0)) throw std::invalid_argument("GridDensity: beta must be positive");
}

double GridDensity::integral() const { return weighted_sum(values, std::pow(grid.weight(), m)); }

GridDensity tabulate(const PhaseGrid& grid, int m,
                     const std::function<double(const std::vector<double>&,
                                                const std::vector<double>&)>& f) {
  GridDensity out(m, grid);
  const std::size_t p = grid.points();
  std::vector<int> ids;
  std::vector<double> xs(m), vs(m);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    decode(idx, m, p, ids);
    for (int i = 0; i < m; ++i) {
      xs[i] = grid.x(ids[i]);
      vs[i] = grid.v(ids[i]);
    }
    out.values[idx] = f(xs, vs);
  }
  return out;
}

GridDensity fluctuation_density(const PhaseGrid& grid, int n, const Observable& g) {
  GridDensity out(n, grid);
  const std::size_t p = grid.points();
  std::vector<int> ids;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    decode(idx, n, p, ids);
    double prod = 1.0, sum = 0.0;
    for (int i = 0; i < n; ++i) {
      prod *= out.reference[ids[i]];
      sum += g(Point{grid.x(ids[i]), 0, 0}, Point{grid.v(ids[i]), 0, 0});
    }
    out.values[idx] = prod * sum;
  }
  return out;
}

GridDensity gibbs_fluctuation_density(const PhaseGrid& grid, int n, const FourierKernel& kernel,
                                      const Observable& f0) {
  if (kernel.dimension() != 1) throw std::invalid_argument("gibbs_fluctuation_density: d = 1 only");
  // spatial Gibbs weights on the x-grid
  const std::size_t nx = grid.nx;
  const std::size_t cells = ipow(nx, n);
  std::vector<double> gibbs(cells);
  std::vector<int> ids;
  for (std::size_t idx = 0; idx < cells; ++idx) {
    decode(idx, n, nx, ids);
    double u = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        u += kernel.potential(Point{static_cast<double>(ids[i] - ids[j]) / grid.nx, 0, 0});
    gibbs[idx] = std::exp(-grid.beta * u / n);
  }
  const double z = pairwise_sum(gibbs) / static_cast<double>(cells);
  GridDensity out(n, grid);
  const std::size_t p = grid.points();
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    decode(idx, n, p, ids);
    std::size_t cell = 0;
    double prod = 1.0, sum = 0.0;
    for (int i = 0; i < n; ++i) {
      cell = cell * nx + ids[i] / grid.nv;
      prod *= out.reference[ids[i]];
      sum += f0(Point{grid.x(ids[i]), 0, 0}, Point{grid.v(ids[i]), 0, 0});
    }
    out.values[idx] = gibbs[cell] / z * prod * sum;
  }
  return out;
}

GridDensity project_centered(const GridDensity& h) {
  if (h.m != 1) throw std::invalid_argument("project_centered: m = 1 only");
  GridDensity out = h;
  const double mass = h.integral();
  for (std::size_t p = 0; p < out.size(); ++p) out.values[p] -= mass * h.reference[p];
  return out;
}

GridDensity marginal(const GridDensity& f, int j) {
  if (j < 0 || j > f.m) throw std::invalid_argument("marginal: order out of range");
  GridDensity cur = f;
  const std::size_t p = f.grid.points();
  const double w = f.grid.weight();
  while (cur.m > j) {
    GridDensity next(cur.m - 1, cur.grid);
    std::vector<double> row(p);
    for (std::size_t idx = 0; idx < next.size(); ++idx) {
      for (std::size_t q = 0; q < p; ++q) row[q] = cur.values[idx * p + q];
      next.values[idx] = pairwise_sum(row) * w;
    }
    cur = std::move(next);
  }
  return cur;
}

GridDensity hoeffding_exact(const GridDensity& fn, int m) {
  if (fn.m > 3) throw std::invalid_argument("hoeffding_exact: N > 3 not supported");
  if (m < 0 || m > fn.m) throw std::invalid_argument("hoeffding_exact: need 0 <= m <= N");
  std::vector<GridDensity> marg;
  for (int j = 0; j <= m; ++j) marg.push_back(marginal(fn, j));
  GridDensity out(m, fn.grid);
  const std::size_t p = fn.grid.points();
  std::vector<int> ids;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    decode(idx, m, p, ids);
    double acc = 0.0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      int j = 0;
      std::size_t sub = 0;
      double ref = 1.0;
      for (int i = 0; i < m; ++i) {
        if (mask & (1u << i)) {
          sub = sub * p + ids[i];
          ++j;
        } else {
          ref *= fn.reference[ids[i]];
        }
      }
      const double sign = ((m - j) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * marg[j].values[sub] * ref;
    }
    out.values[idx] = acc;
  }
  return out;
}

GridDensity hoeffding_tensor(const GridDensity& fn, int m) {
  if (m < 0 || m > fn.m) throw std::invalid_argument("hoeffding_tensor: need 0 <= m <= N");
  GridDensity g = marginal(fn, m);
  const std::size_t p = fn.grid.points();
  const double w = fn.grid.weight();
  for (int axis = 0; axis < m; ++axis) {
    // stride of coordinate `axis` in row-major layout
    const std::size_t stride = ipow(p, m - 1 - axis);
    const std::size_t outer = g.size() / (stride * p);
    std::vector<double> line(p);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t s = 0; s < stride; ++s) {
        const std::size_t base = o * stride * p + s;
        for (std::size_t q = 0; q < p; ++q) line[q] = g.values[base + q * stride];
        const double mass = pairwise_sum(line) * w;
        for (std::size_t q = 0; q < p; ++q) g.values[base + q * stride] -= mass * fn.reference[q];
      }
  }
  return g;
}

OrthogonalityCheck orthogonality_check(const GridDensity& fn) {
  const std::size_t p = fn.grid.points();
  const double w = fn.grid.weight();
  auto chi2 = [&](const GridDensity& h) {
    std::vector<double> terms(h.size());
    std::vector<int> ids;
    for (std::size_t idx = 0; idx < h.size(); ++idx) {
      decode(idx, h.m, p, ids);
      double ref = 1.0;
      for (int i = 0; i < h.m; ++i) ref *= fn.reference[ids[i]];
      terms[idx] = h.values[idx] * h.values[idx] / ref;
    }
    return pairwise_sum(terms) * std::pow(w, h.m);
  };
  OrthogonalityCheck out;
  double binom = 1.0;
  for (int m = 0; m <= fn.m; ++m) {
    out.lhs += binom * chi2(hoeffding_exact(fn, m));
    binom = binom * (fn.m - m) / (m + 1);
  }
  out.rhs = chi2(fn);
  return out;
}

double grid_pairing(const GridDensity& h, const Observable& psi) {
  if (h.m != 1) throw std::invalid_argument("grid_pairing: expected m = 1");
  std::vector<double> t(h.size());
  for (std::size_t q = 0; q < h.size(); ++q)
    t[q] = psi(Point{h.grid.x(q), 0, 0}, Point{h.grid.v(q), 0, 0}) * h.values[q];
  return pairwise_sum(t) * h.grid.weight();
}

double grid_pairing(const GridDensity& h, const Observable& psi, const Observable& chi) {
  if (h.m != 2) throw std::invalid_argument("grid_pairing: expected m = 2");
  const std::size_t p = h.grid.points();
  std::vector<double> a(p), b(p), t(h.size());
  for (std::size_t q = 0; q < p; ++q) {
    a[q] = psi(Point{h.grid.x(q), 0, 0}, Point{h.grid.v(q), 0, 0});
    b[q] = chi(Point{h.grid.x(q), 0, 0}, Point{h.grid.v(q), 0, 0});
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) t[i * p + j] = a[i] * b[j] * h.values[i * p + j];
  const double w = h.grid.weight();
  return pairwise_sum(t) * w * w;
}

double max_abs(const GridDensity& h) {
  double m = 0.0;
  for (double v : h.values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> pair_pairing_values(const Snapshots& snaps, std::size_t time_index,
                                        const Observable& psi, const Observable& chi) {
  const double psi_m = psi.maxwellian_average(snaps.beta, snaps.dimension);
  const double chi_m = chi.maxwellian_average(snaps.beta, snaps.dimension);
  auto out = replica_values(snaps, time_index, PairObservable{psi, chi});
  const auto a = replica_values(snaps, time_index, psi);
  const auto b = replica_values(snaps, time_index, chi);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] -= a[r] * chi_m + psi_m * b[r];
  return out;
}

double bootstrap_stderr(const std::vector<double>& values, int resamples, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n < 2 || resamples < 2) return 0.0;
  std::vector<double> means(resamples);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < resamples; ++b) {
    Engine rng(item_seed(seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> draw(n);
    for (std::size_t i = 0; i < n; ++i) draw[i] = values[pick(rng)];
    means[b] = mean(draw);
  }
  return std::sqrt(variance(means));
}

PairPairing pair_pairing_estimate(const Snapshots& snaps, std::size_t time_index,
                                  const Observable& psi, const Observable& chi, int bootstrap,
                                  std::uint64_t seed) {
  const auto vals = pair_pairing_values(snaps, time_index, psi, chi);
  PairPairing out{psi, chi, mean(vals), bootstrap_stderr(vals, bootstrap, seed)};
  return out;
}

Estimate vlasov_remainder_estimate(const Snapshots& snaps, std::size_t time_index,
                                   const Observable& test, const FourierKernel& kernel) {
  if (kernel.dimension() != 1 || snaps.dimension != 1)
    throw std::invalid_argument("vlasov_remainder_estimate: d = 1 only");
  const auto& states = snaps.states.at(time_index);
  const int n = snaps.n_particles;
  if (n < 2) throw std::invalid_argument("vlasov_remainder_estimate: need N >= 2");
  if (kernel.is_zero() || test.is_zero()) return {0.0, 0.0};

  // c(x) = int d_v phi(x, v) M_beta(v) dv, then Fourier data of c against the
  // kernel modes: a = int c cos(2 pi xi x), b = int c sin(2 pi xi x).
  const int nx = 64, nv = 2401;
  const double beta = snaps.beta;
  const double vmax = 12.0 / std::sqrt(beta), dv = 2.0 * vmax / (nv - 1);
  std::vector<double> c(nx);
  for (int i = 0; i < nx; ++i) {
    std::vector<double> t(nv);
    for (int k = 0; k < nv; ++k) {
      const double v = -vmax + k * dv;
      t[k] = test.dv(Point{static_cast<double>(i) / nx, 0, 0}, Point{v, 0, 0}) *
             std::exp(-0.5 * beta * v * v) * std::sqrt(beta / (2.0 * std::numbers::pi)) * dv;
    }
    c[i] = pairwise_sum(t);
  }
  const auto modes = kernel.modes();
  std::vector<double> ca(modes.size()), cb(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::vector<double> ta(nx), tb(nx);
    for (int i = 0; i < nx; ++i) {
      const double th = two_pi * modes[m].xi[0] * i / nx;
      ta[i] = c[i] * std::cos(th);
      tb[i] = c[i] * std::sin(th);
    }
    ca[m] = pairwise_sum(ta) / nx;
    cb[m] = pairwise_sum(tb) / nx;
  }
  // psi~(y) = int c(x) K(x - y) dx with K(u) = sum 4 pi xi What sin(2 pi xi u)
  auto psi_tilde = [&](double y) {
    double s = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double xi = modes[m].xi[0], th = two_pi * xi * y;
      s += 2.0 * two_pi * xi * modes[m].coefficient * (cb[m] * std::cos(th) - ca[m] * std::sin(th));
    }
    return s;
  };

  std::vector<double> vals(states.size());
  const auto count = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const auto& st = states[r];
    std::vector<Point> f;
    serial::compute_forces(kernel, st.positions, f);
    std::vector<double> a(n), b(n);
    for (int j = 0; j < n; ++j) {
      a[j] = test.dv(st.positions[j], st.velocities[j]) * f[j][0];
      b[j] = psi_tilde(st.positions[j][0]);
    }
    vals[r] = snaps.weights[r] * (pairwise_sum(a) / (n - 1) - pairwise_sum(b) / n);
  }
  return batch_means(vals);
}

}  // namespace mfl
