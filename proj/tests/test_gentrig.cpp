#include <doctest.h>

#include "nhtori/gentrig.hpp"
#include "nhtori/poly_parse.hpp"
#include "nhtori/quasi_trig.hpp"

#include <cmath>

using namespace nhtori;

namespace {

// Composite Gauss-Legendre over one period, stepping Cs/Sn with the Taylor integrator.
double quadrature_moment(int n, int p, int q) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  const double T = period_value(n);
  const int panels = 400;
  const double h = T / panels;
  CsSn left{1.0, 0.0};
  double sum = 0;
  for (int k = 0; k < panels; ++k) {
    for (int i = 0; i < 5; ++i) {
      CsSn s = gentrig_advance(n, left, 0.5 * h * (1 + x[i]));
      sum += 0.5 * h * w[i] * std::pow(s.sn, p) * std::pow(s.cs, q);
    }
    left = gentrig_advance(n, left, h);
  }
  return sum;
}

}  // namespace

TEST_CASE("period") {
  CHECK(period(1) == ConstScalar(2) * ConstScalar::pi());
  CHECK(period(2).to_double() == doctest::Approx(7.416298709205487).epsilon(1e-14));
  for (int n = 1; n <= 3; ++n) {
    CsSn back = gentrig_eval(n, period_value(n) - 1e-9);
    CHECK(std::abs(back.cs - 1.0) < 1e-12);
    // period matches the return time of the Cauchy problem
    CsSn half = gentrig_eval(n, period_value(n) / 2);
    CHECK(half.cs == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("numeric Cs Sn") {
  CsSn z = gentrig_eval(2, 0);
  CHECK(z.cs == 1.0);
  CHECK(z.sn == 0.0);
  CsSn q = gentrig_eval(1, M_PI / 2);
  CHECK(std::abs(q.cs) < 1e-14);
  CHECK(std::abs(q.sn - 1) < 1e-14);
  for (int n = 1; n <= 3; ++n) {
    for (double t = -20; t < 20; t += 0.731) {
      CsSn s = gentrig_eval(n, t);
      CHECK(std::abs(n * s.sn * s.sn + std::pow(s.cs, 2 * n) - 1) < 1e-12);
    }
  }
  for (double t = -7; t < 7; t += 0.37) {
    CsSn s = gentrig_eval(1, t);
    CHECK(std::abs(s.cs - std::cos(t)) < 1e-13);
    CHECK(std::abs(s.sn - std::sin(t)) < 1e-13);
  }
}

TEST_CASE("moments") {
  for (int n = 1; n <= 3; ++n) {
    for (int p = 0; p <= 12; ++p) {
      for (int q = 0; p + q <= 12; ++q) {
        ConstScalar m = moment(n, p, q);
        if (p % 2 == 1 || q % 2 == 1) {
          CHECK(m.is_zero());
          continue;
        }
        CHECK(m == moment_closed_form(n, p, q));
        CHECK(m.enclosure().strictly_positive());
        CHECK(std::abs(m.to_double() - quadrature_moment(n, p, q)) < 1e-12);
      }
    }
  }
  ConstScalar T2 = period(2);
  CHECK(moment(2, 2, 0) == T2 / ConstScalar(3));
  CHECK(moment(2, 0, 2) == T2 * parse_const("2*Gamma(3/4)^4/pi^2"));
  // the two recurrences
  for (int n = 1; n <= 3; ++n) {
    for (int p = 0; p <= 6; p += 2) {
      for (int q = 0; q <= 6; q += 2) {
        CHECK(ConstScalar(p + 1) * moment(n, p, q + 2 * n) == ConstScalar(q + 1) * moment(n, p + 2, q));
        CHECK(ConstScalar(n) * moment(n, p + 2, q) + moment(n, p, q + 2 * n) == moment(n, p, q));
      }
    }
  }
}

TEST_CASE("quasi-trigonometric algebra") {
  using Q = QuasiTrigSeries;
  MultiPoly one = MultiPoly::constant(ConstScalar(1));
  Q cos_t = Q::term({1, false, 0}, one);
  Q sin_t = Q::term({1, true, 0}, one);
  CHECK(cos_t.antiderivative() == sin_t);
  Q t = Q::term({0, false, 1}, one);
  CHECK(Q(one).antiderivative() == t);
  Q c2 = cos_t * cos_t;
  Q expected = t * MultiPoly::constant(ConstScalar(frac(1, 2))) +
               Q::term({2, true, 0}, MultiPoly::constant(ConstScalar(frac(1, 4))));
  CHECK(c2.antiderivative() == expected);
  CHECK(c2.antiderivative().derivative() == c2);
  Q mixed = Q::cos_sin_power(3, 2) * t * t * parse_poly("x+y") + Q::cos_sin_power(0, 5) * parse_poly("x");
  CHECK(mixed.antiderivative().derivative() == mixed);
  CHECK(mixed.antiderivative().at_zero().is_zero());
  // int_0^{2pi} cos^2 = pi
  CHECK(c2.integral_over_period() == MultiPoly::constant(ConstScalar::pi()));
  CHECK(Q::cos_sin_power(2, 2).integral_over_period() == MultiPoly::constant(moment(1, 2, 2)));
}
