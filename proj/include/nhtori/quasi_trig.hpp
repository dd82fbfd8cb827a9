#pragma once

#include "nhtori/poly.hpp"

#include <map>
#include <string>
#include <tuple>

namespace nhtori {

/// Finite sum of c * t^a * cos(l t) or c * t^a * sin(l t), l >= 0, with
/// MultiPoly coefficients. Used for the n = 1 second-order averaging.
class QuasiTrigSeries {
 public:
  struct Key {
    int mode;  // l >= 0
    bool sine;
    int tpow;  // a >= 0
    friend bool operator<(const Key& x, const Key& y) {
      return std::tie(x.mode, x.sine, x.tpow) < std::tie(y.mode, y.sine, y.tpow);
    }
    friend bool operator==(const Key& x, const Key& y) {
      return x.mode == y.mode && x.sine == y.sine && x.tpow == y.tpow;
    }
  };

  QuasiTrigSeries() = default;
  explicit QuasiTrigSeries(const MultiPoly& constant);

  /// cos^j(t) * sin^k(t) in Fourier form.
  static QuasiTrigSeries cos_sin_power(int j, int k);
  static QuasiTrigSeries term(Key key, const MultiPoly& coef);

  const std::map<Key, MultiPoly>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  QuasiTrigSeries& operator+=(const QuasiTrigSeries& other);
  QuasiTrigSeries& operator-=(const QuasiTrigSeries& other);
  friend QuasiTrigSeries operator+(QuasiTrigSeries a, const QuasiTrigSeries& b) { return a += b; }
  friend QuasiTrigSeries operator-(QuasiTrigSeries a, const QuasiTrigSeries& b) { return a -= b; }
  friend QuasiTrigSeries operator*(const QuasiTrigSeries& a, const QuasiTrigSeries& b);
  friend QuasiTrigSeries operator*(const QuasiTrigSeries& a, const MultiPoly& c);
  friend bool operator==(const QuasiTrigSeries& a, const QuasiTrigSeries& b);

  /// Coefficient-wise map, e.g. a partial derivative in a state variable.
  template <class F>
  QuasiTrigSeries map_coefficients(F&& f) const {
    QuasiTrigSeries out;
    for (const auto& [k, c] : terms_) out.add(k, f(c));
    return out;
  }

  QuasiTrigSeries derivative() const;
  /// Antiderivative vanishing at t = 0.
  QuasiTrigSeries antiderivative() const;
  /// Value at t (exact for t = 0 and t = 2 pi).
  MultiPoly at_zero() const;
  MultiPoly at_two_pi() const;
  /// Integral over [0, 2 pi].
  MultiPoly integral_over_period() const;

  /// Numeric evaluation with the coefficients already evaluated.
  double evaluate(double t, const std::map<Key, double>& coef_values) const;

  std::string to_string() const;

 private:
  void add(const Key& k, const MultiPoly& c);
  std::map<Key, MultiPoly> terms_;
};

}  // namespace nhtori
