#include "nhtori/quasi_trig.hpp"

#include <cmath>

namespace nhtori {

namespace {

using Key = QuasiTrigSeries::Key;

MultiPoly scalar(const Rational& q) { return MultiPoly::constant(ConstScalar(q)); }

}  // namespace

QuasiTrigSeries::QuasiTrigSeries(const MultiPoly& constant) { add({0, false, 0}, constant); }

QuasiTrigSeries QuasiTrigSeries::term(Key key, const MultiPoly& coef) {
  QuasiTrigSeries s;
  s.add(key, coef);
  return s;
}

void QuasiTrigSeries::add(const Key& k, const MultiPoly& c) {
  if (c.is_zero()) return;
  if (k.mode == 0 && k.sine) return;
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    terms_.emplace(k, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

QuasiTrigSeries& QuasiTrigSeries::operator+=(const QuasiTrigSeries& other) {
  for (const auto& [k, c] : other.terms_) add(k, c);
  return *this;
}

QuasiTrigSeries& QuasiTrigSeries::operator-=(const QuasiTrigSeries& other) {
  for (const auto& [k, c] : other.terms_) add(k, -c);
  return *this;
}

QuasiTrigSeries operator*(const QuasiTrigSeries& a, const MultiPoly& c) {
  QuasiTrigSeries out;
  if (c.is_zero()) return out;
  for (const auto& [k, v] : a.terms_) out.add(k, v * c);
  return out;
}

QuasiTrigSeries operator*(const QuasiTrigSeries& a, const QuasiTrigSeries& b) {
  QuasiTrigSeries out;
  const MultiPoly half = scalar(frac(1, 2));
  for (const auto& [ka, ca] : a.terms_) {
    for (const auto& [kb, cb] : b.terms_) {
      MultiPoly c = ca * cb * half;
      int tp = ka.tpow + kb.tpow;
      int sum = ka.mode + kb.mode;
      int diff = ka.mode - kb.mode;
      int adiff = std::abs(diff);
      // product-to-sum identities; sin(-x) = -sin(x)
      if (!ka.sine && !kb.sine) {
        out.add({adiff, false, tp}, c);
        out.add({sum, false, tp}, c);
      } else if (ka.sine && kb.sine) {
        out.add({adiff, false, tp}, c);
        out.add({sum, false, tp}, -c);
      } else if (ka.sine) {
        // sin A cos B = (sin(A+B) + sin(A-B)) / 2
        out.add({sum, true, tp}, c);
        out.add({adiff, true, tp}, diff >= 0 ? c : -c);
      } else {
        // cos A sin B = (sin(A+B) - sin(A-B)) / 2
        out.add({sum, true, tp}, c);
        out.add({adiff, true, tp}, diff >= 0 ? -c : c);
      }
    }
  }
  return out;
}

bool operator==(const QuasiTrigSeries& a, const QuasiTrigSeries& b) { return (a - b).is_zero(); }

QuasiTrigSeries QuasiTrigSeries::cos_sin_power(int j, int k) {
  QuasiTrigSeries out(scalar(1));
  QuasiTrigSeries c = term({1, false, 0}, scalar(1));
  QuasiTrigSeries s = term({1, true, 0}, scalar(1));
  for (int i = 0; i < j; ++i) out = out * c;
  for (int i = 0; i < k; ++i) out = out * s;
  return out;
}

QuasiTrigSeries QuasiTrigSeries::derivative() const {
  QuasiTrigSeries out;
  for (const auto& [k, c] : terms_) {
    if (k.tpow > 0) out.add({k.mode, k.sine, k.tpow - 1}, c * scalar(k.tpow));
    if (k.mode > 0) {
      // (cos l t)' = -l sin l t, (sin l t)' = l cos l t
      out.add({k.mode, !k.sine, k.tpow}, c * scalar(k.sine ? k.mode : -k.mode));
    }
  }
  return out;
}

QuasiTrigSeries QuasiTrigSeries::antiderivative() const {
  QuasiTrigSeries out;
  for (const auto& [k, c] : terms_) {
    if (k.mode == 0) {
      out.add({0, false, k.tpow + 1}, c * scalar(frac(1, k.tpow + 1)));
      continue;
    }
    // Integration by parts:
    //   int t^a cos(lt) = t^a sin(lt)/l - (a/l) int t^{a-1} sin(lt)
    //   int t^a sin(lt) = -t^a cos(lt)/l + (a/l) int t^{a-1} cos(lt)
    Rational factor(1);
    bool sine = k.sine;
    for (int a = k.tpow; a >= 0; --a) {
      Rational step = factor / k.mode;
      if (!sine) {
        out.add({k.mode, true, a}, c * scalar(step));
      } else {
        out.add({k.mode, false, a}, c * scalar(-step));
      }
      // remaining integral: factor' * int t^{a-1} (other function)
      factor = sine ? Rational(step * a) : Rational(-step * a);
      sine = !sine;
    }
  }
  MultiPoly c0 = out.at_zero();
  out.add({0, false, 0}, -c0);
  return out;
}

MultiPoly QuasiTrigSeries::at_zero() const {
  MultiPoly sum;
  for (const auto& [k, c] : terms_) {
    if (k.tpow == 0 && !k.sine) sum += c;
  }
  return sum;
}

MultiPoly QuasiTrigSeries::at_two_pi() const {
  MultiPoly sum;
  const ConstScalar two_pi = ConstScalar(2) * ConstScalar::pi();
  for (const auto& [k, c] : terms_) {
    if (k.sine) continue;
    sum += c * MultiPoly::constant(two_pi.pow(static_cast<long>(k.tpow)));
  }
  return sum;
}

MultiPoly QuasiTrigSeries::integral_over_period() const { return antiderivative().at_two_pi(); }

double QuasiTrigSeries::evaluate(double t, const std::map<Key, double>& coef_values) const {
  double sum = 0;
  for (const auto& [k, c] : terms_) {
    auto it = coef_values.find(k);
    if (it == coef_values.end()) continue;
    double f = k.sine ? std::sin(k.mode * t) : std::cos(k.mode * t);
    sum += it->second * std::pow(t, k.tpow) * f;
  }
  return sum;
}

std::string QuasiTrigSeries::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [k, c] : terms_) {
    if (!s.empty()) s += " + ";
    s += "(" + c.to_string() + ")";
    if (k.tpow > 0) s += "*t^" + std::to_string(k.tpow);
    if (k.mode > 0) s += std::string(k.sine ? "*sin(" : "*cos(") + std::to_string(k.mode) + "t)";
  }
  return s;
}

}  // namespace nhtori
