#pragma once

// Test functions on phase space T^d x R^d built from a small expression set:
// sums of coef * trig(2 pi k.x) * prod_a He_{n_a}(scale * v_a), with He_n the
// probabilists' Hermite polynomials.
//
// Text syntax (used by config files): terms joined by '+' or '-', each a
// '*'-product of an optional number, cos(k...), sin(k...) and He(n...).
// Frequencies and Hermite orders list one integer per dimension separated
// by commas; a single integer means axis 0. Example: "0.5*cos(1)*He(1) + He(2)".

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "mfl/kernels.hpp"

namespace mfl {

enum class Trig { cos, sin };

struct ObservableTerm {
  double coefficient = 1.0;
  Frequency k{};
  Trig trig = Trig::cos;
  std::array<int, 3> hermite{};

  bool operator==(const ObservableTerm&) const = default;
};

double hermite_he(int n, double x);

class Observable {
 public:
  Observable() = default;
  // velocity_scale multiplies v inside every Hermite factor (sqrt(beta) for
  // the Maxwellian-adapted basis).
  Observable(std::vector<ObservableTerm> terms, double velocity_scale);

  static Observable zero();
  static Observable constant(double c);
  static Observable cos_mode(int k, double coefficient = 1.0);
  static Observable sin_mode(int k, double coefficient = 1.0);
  // cos(2 pi k x) * He_1(sqrt(beta) v) = cos(2 pi k x) v sqrt(beta)
  static Observable cos_times_velocity(int k, double beta);
  static Observable hermite(int n, double beta);

  double operator()(const Point& x, const Point& v) const;
  // d/dv_axis
  double dv(const Point& x, const Point& v, int axis = 0) const;

  const std::vector<ObservableTerm>& terms() const { return terms_; }
  double velocity_scale() const { return velocity_scale_; }
  bool is_zero() const;

  // int phi(x,v) M_beta(v) dx dv by tensor trapezoid quadrature.
  double maxwellian_average(double beta, int dimension) const;

  std::string to_string() const;

  bool operator==(const Observable&) const = default;

 private:
  std::vector<ObservableTerm> terms_;
  double velocity_scale_ = 1.0;
};

// Throws std::invalid_argument on malformed input.
Observable parse_observable(std::string_view text, double velocity_scale);

// A tensor test function psi (x) chi for two-particle pairings.
struct PairObservable {
  Observable psi;
  Observable chi;
};

}  // namespace mfl
