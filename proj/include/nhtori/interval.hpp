#pragma once

#include "nhtori/rational.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace nhtori {

/// Closed interval with rational endpoints.
///
/// precision() == 0 means exact endpoints. A nonzero precision p makes every
/// operation round its endpoints outward to p-bit binary floats (directed
/// rounding), which keeps endpoint sizes bounded on long evaluations.
class Interval {
 public:
  Interval() = default;
  Interval(const Rational& value, unsigned precision = 0);  // NOLINT(google-explicit-constructor)
  Interval(int value) : Interval(Rational(value)) {}        // NOLINT(google-explicit-constructor)
  Interval(const Rational& lower, const Rational& upper, unsigned precision = 0);

  const Rational& lower() const { return lo_; }
  const Rational& upper() const { return hi_; }
  unsigned precision() const { return prec_; }

  Rational width() const { return hi_ - lo_; }
  Rational midpoint() const { return (lo_ + hi_) / 2; }
  /// max(|lower|, |upper|)
  Rational magnitude() const;
  /// min |x| over the interval (0 when it contains 0).
  Rational mignitude() const;

  bool contains(const Rational& x) const { return lo_ <= x && x <= hi_; }
  bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }
  bool contains_zero() const { return lo_ <= 0 && 0 <= hi_; }
  bool strictly_positive() const { return lo_ > 0; }
  bool strictly_negative() const { return hi_ < 0; }

  Interval with_precision(unsigned precision) const;

  Interval& operator+=(const Interval& other);
  Interval& operator-=(const Interval& other);
  Interval& operator*=(const Interval& other);
  Interval& operator/=(const Interval& other);

  friend Interval operator+(Interval a, const Interval& b) { return a += b; }
  friend Interval operator-(Interval a, const Interval& b) { return a -= b; }
  friend Interval operator*(Interval a, const Interval& b) { return a *= b; }
  friend Interval operator/(Interval a, const Interval& b) { return a /= b; }
  friend Interval operator-(const Interval& a) { return Interval(-a.hi_, -a.lo_, a.prec_); }

  friend bool operator==(const Interval& a, const Interval& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }

 private:
  void round_outward();

  Rational lo_{0};
  Rational hi_{0};
  unsigned prec_ = 0;
};

Interval pow(const Interval& base, unsigned exponent);
Interval hull(const Interval& a, const Interval& b);
Interval abs(const Interval& a);
/// Enclosure of sqrt over a nonnegative interval, endpoints with `bits` fractional bits.
Interval sqrt(const Interval& a, unsigned bits = 256);
/// Enclosures of the real roots of a x^2 + b x + c (a != 0, positive discriminant), ascending.
std::array<Interval, 2> quadratic_roots(const Rational& a, const Rational& b, const Rational& c, unsigned bits = 256);

std::ostream& operator<<(std::ostream& os, const Interval& x);

/// Scientific rendering of both endpoints with `digits` significant digits.
std::string to_sci_string(const Interval& x, int digits = 10);
std::string to_sci_string(const Rational& q, int digits = 10);
double to_double(const Rational& q);

/// Rounds q to a binary float with `bits` of mantissa in the given direction
/// (up = true rounds toward +infinity).
Rational round_to_bits(const Rational& q, unsigned bits, bool up);

struct IntervalMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Interval> data;

  IntervalMatrix() = default;
  IntervalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  Interval& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Interval& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

}  // namespace nhtori
