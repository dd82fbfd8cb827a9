#include "nhtori/gentrig.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nhtori {

namespace {

void check_n(int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("Andreev number outside the supported range 1..3");
}

// sqrt(pi/n)-type factor n^(-1/2) stays in the basis for n <= 3.
ConstScalar inv_sqrt_n(int n) { return ConstScalar::rational_power(frac(1, n), frac(1, 2)); }

}  // namespace

ConstScalar period(int n) {
  check_n(n);
  return ConstScalar(2) * ConstScalar::pi().pow(frac(1, 2)) * inv_sqrt_n(n) * ConstScalar::gamma(frac(1, 2 * n)) /
         ConstScalar::gamma(frac(n + 1, 2 * n));
}

ConstScalar moment_closed_form(int n, int p, int q) {
  check_n(n);
  if (p < 0 || q < 0) throw std::invalid_argument("negative moment index");
  if (p % 2 != 0 || q % 2 != 0) return ConstScalar();
  // I = (2/n) n^{-(p-1)/2} B((q+1)/2n, (p+1)/2)
  Rational a = frac(q + 1, 2 * n);
  Rational b = frac(p + 1, 2);
  ConstScalar scale = ConstScalar(frac(2, n)) * ConstScalar::rational_power(Rational(n), frac(1 - p, 2));
  return scale * ConstScalar::gamma(a) * ConstScalar::gamma(b) / ConstScalar::gamma(a + b);
}

ConstScalar moment(int n, int p, int q) {
  check_n(n);
  if (p < 0 || q < 0) throw std::invalid_argument("negative moment index");
  if (p % 2 != 0 || q % 2 != 0) return ConstScalar();
  const int q0 = q % (2 * n);
  ConstScalar value = q0 == 0 ? period(n) : moment_closed_form(n, 0, q0);
  // I(p+2, q) = (p+1) I(p, q) / (n(p+1) + q + 1)
  for (int pp = 0; pp < p; pp += 2) value *= ConstScalar(frac(pp + 1, n * (pp + 1) + q0 + 1));
  // I(p, q+2n) = (q+1) I(p, q) / (n(p+1) + q + 1)
  for (int qq = q0; qq < q; qq += 2 * n) value *= ConstScalar(frac(qq + 1, n * (p + 1) + qq + 1));
  return value;
}

MomentTable::MomentTable(int n) : n_(n), period_(nhtori::period(n)) {}

ConstScalar MomentTable::get(int p, int q) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find({p, q});
    if (it != cache_.end()) return it->second;
  }
  ConstScalar v = moment(n_, p, q);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(std::make_pair(p, q), v);
  return v;
}

double period_value(int n) {
  static const double values[3] = {period(1).to_double(), period(2).to_double(), period(3).to_double()};
  check_n(n);
  return values[n - 1];
}

CsSn gentrig_advance(int n, CsSn state, double h) {
  constexpr int kOrder = 28;
  const int k = 2 * n - 1;
  std::vector<long double> u(kOrder + 1);
  std::vector<long double> v(kOrder + 1);
  // pw[j] holds Taylor coefficients of u^j, rebuilt incrementally.
  std::vector<std::vector<long double>> pw(k + 1, std::vector<long double>(kOrder + 1, 0.0L));
  u[0] = state.cs;
  v[0] = state.sn;
  for (int m = 0; m < kOrder; ++m) {
    pw[0][m] = m == 0 ? 1.0L : 0.0L;
    for (int j = 1; j <= k; ++j) {
      long double s = 0;
      for (int i = 0; i <= m; ++i) s += pw[j - 1][i] * u[m - i];
      pw[j][m] = s;
    }
    u[m + 1] = -v[m] / (m + 1);
    v[m + 1] = pw[k][m] / (m + 1);
  }
  long double cu = 0;
  long double cv = 0;
  for (int m = kOrder; m >= 0; --m) {
    cu = cu * h + u[m];
    cv = cv * h + v[m];
  }
  return {static_cast<double>(cu), static_cast<double>(cv)};
}

CsSn gentrig_eval(int n, double theta) {
  check_n(n);
  const double T = period_value(n);
  double t = std::fmod(theta, T);
  if (t < 0) t += T;
  // Cs is even and T-periodic, Sn odd: reflect into [0, T/2].
  double sign = 1.0;
  if (t > T / 2) {
    t = T - t;
    sign = -1.0;
  }
  CsSn s{1.0, 0.0};
  const double max_step = 0.05;
  int steps = static_cast<int>(std::ceil(t / max_step));
  if (steps == 0) return {1.0, 0.0};
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) s = gentrig_advance(n, s, h);
  return {s.cs, sign * s.sn};
}

}  // namespace nhtori
