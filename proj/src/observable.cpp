#include "mfl/observable.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mfl/stats.hpp"

namespace mfl {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

double hermite_he(int n, double x) {
  if (n == 0) return 1.0;
  double h0 = 1.0, h1 = x;
  for (int m = 1; m < n; ++m) {
    const double h2 = x * h1 - m * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

Observable::Observable(std::vector<ObservableTerm> terms, double velocity_scale)
    : terms_(std::move(terms)), velocity_scale_(velocity_scale) {}

Observable Observable::zero() { return Observable({}, 1.0); }

Observable Observable::constant(double c) {
  ObservableTerm t;
  t.coefficient = c;
  return Observable({t}, 1.0);
}

Observable Observable::cos_mode(int k, double coefficient) {
  ObservableTerm t;
  t.coefficient = coefficient;
  t.k = {k, 0, 0};
  return Observable({t}, 1.0);
}

Observable Observable::sin_mode(int k, double coefficient) {
  ObservableTerm t;
  t.coefficient = coefficient;
  t.k = {k, 0, 0};
  t.trig = Trig::sin;
  return Observable({t}, 1.0);
}

Observable Observable::cos_times_velocity(int k, double beta) {
  ObservableTerm t;
  t.k = {k, 0, 0};
  t.hermite = {1, 0, 0};
  return Observable({t}, std::sqrt(beta));
}

Observable Observable::hermite(int n, double beta) {
  ObservableTerm t;
  t.hermite = {n, 0, 0};
  return Observable({t}, std::sqrt(beta));
}

bool Observable::is_zero() const {
  for (const auto& t : terms_)
    if (t.coefficient != 0.0) return false;
  return true;
}

namespace {

double spatial_factor(const ObservableTerm& t, const Point& x) {
  const double ph = two_pi * (t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2]);
  return t.trig == Trig::cos ? std::cos(ph) : std::sin(ph);
}

}  // namespace

double Observable::operator()(const Point& x, const Point& v) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double p = t.coefficient * spatial_factor(t, x);
    for (int a = 0; a < 3; ++a)
      if (t.hermite[a]) p *= hermite_he(t.hermite[a], velocity_scale_ * v[a]);
    s += p;
  }
  return s;
}

double Observable::dv(const Point& x, const Point& v, int axis) const {
  // He_n'(y) = n He_{n-1}(y)
  double s = 0.0;
  for (const auto& t : terms_) {
    const int n = t.hermite[axis];
    if (n == 0) continue;
    double p = t.coefficient * spatial_factor(t, x) * velocity_scale_ * n *
               hermite_he(n - 1, velocity_scale_ * v[axis]);
    for (int a = 0; a < 3; ++a)
      if (a != axis && t.hermite[a]) p *= hermite_he(t.hermite[a], velocity_scale_ * v[a]);
    s += p;
  }
  return s;
}

double Observable::maxwellian_average(double beta, int dimension) const {
  // x: periodic trapezoid of exp(2 pi i k_a x_a) per axis; v: trapezoid on
  // [-12, 12] standard deviations (Gaussian tail far below 1e-16).
  const int nx = 64, nv = 2401;
  const double sd = 1.0 / std::sqrt(beta);
  const double vmax = 12.0 * sd, dv = 2.0 * vmax / (nv - 1);
  auto axis_fourier = [&](int k) {
    std::vector<std::complex<double>> vals(nx);
    for (int i = 0; i < nx; ++i) vals[i] = std::polar(1.0, two_pi * k * i / nx);
    std::complex<double> s = 0.0;
    for (const auto& z : vals) s += z;
    return s / static_cast<double>(nx);
  };
  auto axis_velocity = [&](int n) {
    std::vector<double> vals(nv);
    for (int i = 0; i < nv; ++i) {
      const double v = -vmax + i * dv;
      const double m = std::exp(-0.5 * beta * v * v) * std::sqrt(beta / (2.0 * std::numbers::pi));
      vals[i] = hermite_he(n, velocity_scale_ * v) * m * dv;
    }
    return pairwise_sum(vals);
  };
  double total = 0.0;
  for (const auto& t : terms_) {
    std::complex<double> xpart = 1.0;
    for (int a = 0; a < dimension; ++a) xpart *= axis_fourier(t.k[a]);
    // cos -> real part, sin -> imaginary part of prod exp(2 pi i k_a x_a)
    double p = t.coefficient * (t.trig == Trig::cos ? xpart.real() : xpart.imag());
    for (int a = 0; a < dimension; ++a) p *= axis_velocity(t.hermite[a]);
    total += p;
  }
  return total;
}

std::string Observable::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  auto list = [](const auto& arr) {
    std::string s;
    int last = 0;
    for (int a = 0; a < 3; ++a)
      if (arr[a] != 0) last = a;
    for (int a = 0; a <= last; ++a) s += (a ? "," : "") + std::to_string(arr[a]);
    return s;
  };
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (i) os << (t.coefficient < 0 ? " - " : " + ");
    os << (i ? std::abs(t.coefficient) : t.coefficient);
    const bool has_k = t.k != Frequency{0, 0, 0};
    if (has_k || t.trig == Trig::sin) os << '*' << (t.trig == Trig::cos ? "cos(" : "sin(") << list(t.k) << ')';
    if (t.hermite != std::array<int, 3>{0, 0, 0}) os << "*He(" << list(t.hermite) << ')';
  }
  return os.str();
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  std::vector<ObservableTerm> parse() {
    std::vector<ObservableTerm> terms;
    skip();
    if (pos_ < s_.size() && s_.substr(pos_) == "0") return terms;
    double sign = 1.0;
    if (peek('-')) {
      ++pos_;
      sign = -1.0;
    } else if (peek('+')) {
      ++pos_;
    }
    while (true) {
      auto t = term();
      t.coefficient *= sign;
      terms.push_back(t);
      skip();
      if (pos_ >= s_.size()) break;
      if (peek('+')) sign = 1.0;
      else if (peek('-')) sign = -1.0;
      else fail("expected '+' or '-'");
      ++pos_;
    }
    return terms;
  }

 private:
  ObservableTerm term() {
    ObservableTerm t;
    bool any = false, have_trig = false, have_he = false;
    while (true) {
      skip();
      if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
        t.coefficient *= number();
      } else if (match("cos(") || match("sin(")) {
        if (have_trig) fail("more than one trigonometric factor in a term");
        have_trig = true;
        t.trig = s_[pos_ - 4] == 'c' ? Trig::cos : Trig::sin;
        const auto ints = int_list();
        for (std::size_t a = 0; a < ints.size(); ++a) t.k[a] = ints[a];
      } else if (match("He(")) {
        if (have_he) fail("more than one Hermite factor in a term");
        have_he = true;
        const auto ints = int_list();
        for (std::size_t a = 0; a < ints.size(); ++a) {
          if (ints[a] < 0) fail("negative Hermite order");
          t.hermite[a] = ints[a];
        }
      } else {
        fail("expected number, cos(, sin( or He(");
      }
      any = true;
      skip();
      if (!peek('*')) break;
      ++pos_;
    }
    if (!any) fail("empty term");
    return t;
  }

  std::vector<int> int_list() {
    std::vector<int> out;
    while (true) {
      skip();
      int sign = 1;
      if (peek('-')) {
        sign = -1;
        ++pos_;
      }
      int v = 0;
      auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("expected integer");
      pos_ = p - s_.data();
      out.push_back(sign * v);
      skip();
      if (peek(',')) {
        ++pos_;
        continue;
      }
      if (peek(')')) {
        ++pos_;
        break;
      }
      fail("expected ',' or ')'");
    }
    if (out.size() > 3) fail("at most three components");
    return out;
  }

  double number() {
    std::size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                               s_[end] == 'e' || s_[end] == 'E' ||
                               ((s_[end] == '-' || s_[end] == '+') && end > pos_ &&
                                (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
      ++end;
    const std::string tok(s_.substr(pos_, end - pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    if (used != tok.size()) fail("bad number");
    pos_ = end;
    return v;
  }

  bool match(std::string_view w) {
    if (s_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }
  bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("observable '" + std::string(s_) + "': " + what + " at offset " +
                                std::to_string(pos_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Observable parse_observable(std::string_view text, double velocity_scale) {
  return Observable(Parser(text).parse(), velocity_scale);
}

}  // namespace mfl
