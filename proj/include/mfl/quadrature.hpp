#pragma once

#include <vector>

namespace mfl {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// n equispaced points on [0,1) with weights 1/n. Spectrally accurate for
// smooth periodic integrands.
QuadratureRule periodic_trapezoid(int n);

}  // namespace mfl
