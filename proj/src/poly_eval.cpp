#include "nhtori/poly_eval.hpp"

#include <mpfr.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace nhtori {

namespace {

template <class C, class CoefEnclose>
Interval eval_impl(const BasicPoly<C>& p, const IntervalBox& box, unsigned bits, CoefEnclose enclose) {
  const std::size_t n = p.nvars();
  std::vector<const Interval*> value(n, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = box.find((*p.vars())[i]);
    if (it != box.end()) value[i] = &it->second;
  }
  // Powers are cached per variable so repeated exponents are cheap.
  std::vector<std::map<int, Interval>> powers(n);
  auto power = [&](std::size_t i, int e) -> const Interval& {
    auto it = powers[i].find(e);
    if (it != powers[i].end()) return it->second;
    Interval v = value[i]->with_precision(bits);
    Interval pw = e >= 0 ? pow(v, static_cast<unsigned>(e)) : pow(Interval(Rational(1), bits) / v, static_cast<unsigned>(-e));
    return powers[i].emplace(e, pw).first->second;
  };
  Interval sum(Rational(0), bits);
  for (const auto& [e, c] : p.terms()) {
    Interval term = enclose(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (e[i] == 0) continue;
      if (value[i] == nullptr) throw std::invalid_argument("unbound variable in interval_eval: " + (*p.vars())[i]);
      term *= power(i, e[i]);
    }
    sum += term;
  }
  return sum;
}

}  // namespace

Interval interval_eval(const MultiPoly& p, const IntervalBox& box, unsigned bits) {
  unsigned cbits = bits == 0 ? default_precision_bits() : bits;
  return eval_impl(p, box, bits, [&](const ConstScalar& c) {
    if (c.is_rational()) return Interval(c.to_rational(), bits);
    return c.enclosure(cbits).with_precision(bits);
  });
}

Interval interval_eval(const RatPoly& p, const IntervalBox& box, unsigned bits) {
  return eval_impl(p, box, bits, [&](const Rational& c) { return Interval(c, bits); });
}

Rational eval_rational(const RatPoly& p, const std::map<std::string, Rational>& point) { return p.evaluate(point); }

}  // namespace nhtori

namespace nhtori {

namespace {

long double long_value(const ConstScalar& c) {
  Interval e = c.enclosure(128);
  mpfr_t tmp;
  mpfr_init2(tmp, 128);
  Rational mid = e.midpoint();
  mpfr_set_q(tmp, mid.get_mpq_t(), MPFR_RNDN);
  long double v = mpfr_get_ld(tmp, MPFR_RNDN);
  mpfr_clear(tmp);
  return v;
}

long double ipow(long double x, int e) {
  if (e < 0) return 1.0L / ipow(x, -e);
  long double out = 1.0L;
  while (e > 0) {
    if (e & 1) out *= x;
    x *= x;
    e >>= 1;
  }
  return out;
}

}  // namespace

CompiledPoly::CompiledPoly(const MultiPoly& p, const std::vector<std::string>& order,
                           const std::map<std::string, long double>& fixed) {
  std::vector<int> slot(p.nvars(), -1);
  std::vector<long double> fixed_value(p.nvars(), 0.0L);
  for (std::size_t i = 0; i < p.nvars(); ++i) {
    const std::string& name = (*p.vars())[i];
    auto it = std::find(order.begin(), order.end(), name);
    if (it != order.end()) {
      slot[i] = static_cast<int>(it - order.begin());
    } else if (auto f = fixed.find(name); f != fixed.end()) {
      fixed_value[i] = f->second;
    } else {
      bool used = false;
      for (const auto& [e, c] : p.terms()) used = used || e[i] != 0;
      if (used) throw std::invalid_argument("unbound variable in compiled polynomial: " + name);
    }
  }
  std::map<std::vector<std::pair<int, int>>, long double> merged;
  for (const auto& [e, c] : p.terms()) {
    long double coef = long_value(c);
    std::vector<std::pair<int, int>> powers;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (slot[i] >= 0) {
        powers.emplace_back(slot[i], e[i]);
      } else {
        coef *= ipow(fixed_value[i], e[i]);
      }
    }
    std::sort(powers.begin(), powers.end());
    merged[powers] += coef;
  }
  for (auto& [powers, coef] : merged) {
    if (coef != 0.0L) terms_.push_back({coef, powers});
  }
}

long double CompiledPoly::operator()(const long double* x) const {
  long double sum = 0.0L;
  for (const auto& t : terms_) {
    long double v = t.coef;
    for (const auto& [i, e] : t.powers) v *= ipow(x[i], e);
    sum += v;
  }
  return sum;
}

double CompiledPoly::operator()(const double* x) const {
  long double sum = 0.0L;
  for (const auto& t : terms_) {
    long double v = t.coef;
    for (const auto& [i, e] : t.powers) v *= ipow(static_cast<long double>(x[i]), e);
    sum += v;
  }
  return static_cast<double>(sum);
}

}  // namespace nhtori
