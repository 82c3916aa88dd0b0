#include "mfl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mfl/stats.hpp"

namespace mfl {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool in_half_lattice(const Frequency& xi, int d) {
  for (int i = 0; i < d; ++i) {
    if (xi[i] > 0) return true;
    if (xi[i] < 0) return false;
  }
  return false;
}

double euclidean(const Frequency& xi, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += static_cast<double>(xi[i]) * xi[i];
  return std::sqrt(s);
}

int sup_norm(const Frequency& xi) {
  return std::max({std::abs(xi[0]), std::abs(xi[1]), std::abs(xi[2])});
}

Frequency negate(Frequency xi) {
  for (auto& c : xi) c = -c;
  return xi;
}

void for_each_frequency(int d, int cutoff, const std::function<void(const Frequency&)>& fn) {
  const int lo1 = d >= 2 ? -cutoff : 0, hi1 = d >= 2 ? cutoff : 0;
  const int lo2 = d >= 3 ? -cutoff : 0, hi2 = d >= 3 ? cutoff : 0;
  for (int a = -cutoff; a <= cutoff; ++a)
    for (int b = lo1; b <= hi1; ++b)
      for (int c = lo2; c <= hi2; ++c) fn(Frequency{a, b, c});
}

double phase(const KernelMode& m, const Point& x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += m.xi[i] * x[i];
  return two_pi * s;
}

}  // namespace

FourierKernel::FourierKernel(KernelSpec spec) : spec_(std::move(spec)) {
  const int d = spec_.dimension;
  if (d < 1 || d > 3) throw std::invalid_argument("kernel: dimension must be 1, 2 or 3");
  if (spec_.cutoff < 1) throw std::invalid_argument("kernel: cutoff must be >= 1");

  switch (spec_.family) {
    case KernelFamily::riesz:
      if (!(spec_.riesz_s > 0.0 && spec_.riesz_s < d))
        throw std::invalid_argument("kernel: riesz order s must lie in (0, d), got " +
                                    std::to_string(spec_.riesz_s));
      [[fallthrough]];
    case KernelFamily::log: {
      const double power = spec_.family == KernelFamily::log ? -static_cast<double>(d)
                                                             : spec_.riesz_s - d;
      for_each_frequency(d, spec_.cutoff, [&](const Frequency& xi) {
        if (in_half_lattice(xi, d)) modes_.push_back({xi, std::pow(euclidean(xi, d), power)});
      });
      break;
    }
    case KernelFamily::fourier_table: {
      for (const auto& [xi, value] : spec_.table) {
        for (int i = d; i < 3; ++i)
          if (xi[i] != 0)
            throw std::invalid_argument("kernel: table frequency has components beyond dimension");
        if (sup_norm(xi) == 0) {
          if (value != 0.0) throw std::invalid_argument("kernel: table has nonzero xi=0 entry");
          continue;
        }
        if (sup_norm(xi) > spec_.cutoff)
          throw std::invalid_argument("kernel: table frequency exceeds cutoff");
        const auto partner = spec_.table.find(negate(xi));
        const double mirrored = partner == spec_.table.end() ? 0.0 : partner->second;
        if (mirrored != value) throw std::invalid_argument("kernel: table is not even in xi");
        if (in_half_lattice(xi, d) && value != 0.0) modes_.push_back({xi, value});
      }
      break;
    }
  }
}

bool FourierKernel::is_zero() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const KernelMode& m) { return m.coefficient == 0.0; });
}

double FourierKernel::coefficient(const Frequency& xi) const {
  const Frequency rep = in_half_lattice(xi, spec_.dimension) ? xi : negate(xi);
  for (const auto& m : modes_)
    if (m.xi == rep) return m.coefficient;
  return 0.0;
}

double FourierKernel::potential(const Point& x) const {
  double s = 0.0;
  for (const auto& m : modes_) s += 2.0 * m.coefficient * std::cos(phase(m, x, spec_.dimension));
  return s;
}

Point FourierKernel::force(const Point& x) const {
  Point k{0.0, 0.0, 0.0};
  for (const auto& m : modes_) {
    const double amp = 2.0 * two_pi * m.coefficient * std::sin(phase(m, x, spec_.dimension));
    for (int i = 0; i < spec_.dimension; ++i) k[i] += amp * m.xi[i];
  }
  return k;
}

double FourierKernel::value_at_origin() const {
  double s = 0.0;
  for (const auto& m : modes_) s += 2.0 * m.coefficient;
  return s;
}

double FourierKernel::l2_squared() const {
  double s = 0.0;
  for (const auto& m : modes_) s += 2.0 * m.coefficient * m.coefficient;
  return s;
}

namespace {

std::size_t grid_points(int n, int d) {
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  return total;
}

Point grid_point(std::size_t idx, int n, int d) {
  Point x{0.0, 0.0, 0.0};
  for (int i = d - 1; i >= 0; --i) {
    x[i] = static_cast<double>(idx % n) / n;
    idx /= n;
  }
  return x;
}

}  // namespace

std::vector<double> FourierKernel::sample_grid(int n) const {
  const int d = spec_.dimension;
  const std::size_t total = grid_points(n, d);
  std::vector<double> out(total);
  const auto count = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = potential(grid_point(i, n, d));
  return out;
}

namespace serial {
std::vector<double> sample_grid(const FourierKernel& kernel, int n) {
  const int d = kernel.dimension();
  std::vector<double> out(grid_points(n, d));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kernel.potential(grid_point(i, n, d));
  return out;
}
}  // namespace serial

KernelNorms FourierKernel::norms(int grid_size) const {
  if (grid_size < 2 * spec_.cutoff + 1)
    throw std::invalid_argument("kernel norms: grid_size must be >= 2*cutoff+1");
  const auto w = sample_grid(grid_size);
  const double n = static_cast<double>(w.size());
  std::vector<double> absval(w.size()), sq(w.size());
  KernelNorms out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    absval[i] = std::abs(w[i]);
    sq[i] = w[i] * w[i];
    out.neg_sup = std::max(out.neg_sup, -w[i]);
  }
  out.l1 = pairwise_sum(absval) / n;
  out.l2 = std::sqrt(pairwise_sum(sq) / n);
  out.mean = pairwise_sum(w) / n;
  out.l2_squared_parseval = l2_squared();
  // weak-L2 quasi-norm sup_t t |{|W| > t}|^{1/2} from the sorted samples
  std::sort(absval.begin(), absval.end(), std::greater<>());
  for (std::size_t i = 0; i < absval.size(); ++i)
    out.weak_l2 = std::max(out.weak_l2, absval[i] * std::sqrt((i + 1) / n));
  return out;
}

FourierKernel cosine_kernel(double amplitude) {
  KernelSpec spec;
  spec.dimension = 1;
  spec.family = KernelFamily::fourier_table;
  spec.cutoff = 1;
  spec.table[{1, 0, 0}] = 0.5 * amplitude;
  spec.table[{-1, 0, 0}] = 0.5 * amplitude;
  return FourierKernel(spec);
}

FourierKernel zero_kernel(int dimension) {
  KernelSpec spec;
  spec.dimension = dimension;
  spec.cutoff = 1;
  return FourierKernel(spec);
}

FourierKernel riesz_kernel(int dimension, double s, int cutoff) {
  KernelSpec spec;
  spec.dimension = dimension;
  spec.family = KernelFamily::riesz;
  spec.riesz_s = s;
  spec.cutoff = cutoff;
  return FourierKernel(spec);
}

FourierKernel log_kernel(int dimension, int cutoff) {
  KernelSpec spec;
  spec.dimension = dimension;
  spec.family = KernelFamily::log;
  spec.cutoff = cutoff;
  return FourierKernel(spec);
}

Point reduce_to_torus(Point x, int dimension) {
  for (int i = 0; i < dimension; ++i) x[i] -= std::floor(x[i] + 0.5);
  return x;
}

}  // namespace mfl
