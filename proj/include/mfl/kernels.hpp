#pragma once

// Periodic pair potentials on the unit torus T^d given by a truncated Fourier
// series W(x) = sum_{0<|xi|_inf<=cutoff} What(xi) exp(2 pi i xi.x), together
// with the force field K = -grad W.

#include <array>
#include <map>
#include <span>
#include <vector>

namespace mfl {

using Point = std::array<double, 3>;
using Frequency = std::array<int, 3>;

enum class KernelFamily { riesz, log, fourier_table };

struct KernelSpec {
  int dimension = 1;
  KernelFamily family = KernelFamily::fourier_table;
  double riesz_s = 0.0;
  int cutoff = 1;
  // Only read for fourier_table. Unused frequency components must be zero.
  std::map<Frequency, double> table;

  bool operator==(const KernelSpec&) const = default;
};

// A half-lattice representative xi (first nonzero component positive). It
// contributes 2 * coefficient * cos(2 pi xi.x) to W.
struct KernelMode {
  Frequency xi{};
  double coefficient = 0.0;
};

struct KernelNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double neg_sup = 0.0;
  double mean = 0.0;
  double l2_squared_parseval = 0.0;
  double weak_l2 = 0.0;
};

class FourierKernel {
 public:
  // Validates the spec and builds the coefficient array. Throws
  // std::invalid_argument on an invalid spec.
  explicit FourierKernel(KernelSpec spec);

  const KernelSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  int cutoff() const { return spec_.cutoff; }
  std::span<const KernelMode> modes() const { return modes_; }
  bool is_zero() const;

  // What(xi) for any xi; zero outside the retained set.
  double coefficient(const Frequency& xi) const;

  double potential(const Point& x) const;
  Point force(const Point& x) const;

  // W(0) = sum of all coefficients.
  double value_at_origin() const;
  // sum_{xi != 0} |What(xi)|^2 (Parseval).
  double l2_squared() const;

  // W sampled on the tensor grid {i/n}^d, row-major with the last axis
  // fastest.
  std::vector<double> sample_grid(int n) const;

  KernelNorms norms(int grid_size) const;

 private:
  KernelSpec spec_;
  std::vector<KernelMode> modes_;
};

inline FourierKernel make_kernel(const KernelSpec& spec) { return FourierKernel(spec); }

// W(x) = amplitude * cos(2 pi x) in d = 1.
FourierKernel cosine_kernel(double amplitude = 1.0);
FourierKernel zero_kernel(int dimension = 1);
FourierKernel riesz_kernel(int dimension, double s, int cutoff);
FourierKernel log_kernel(int dimension, int cutoff);

// Maps each component into [-1/2, 1/2).
Point reduce_to_torus(Point x, int dimension);

namespace serial {
std::vector<double> sample_grid(const FourierKernel& kernel, int n);
}

}  // namespace mfl
