#pragma once

#include "nhtori/interval.hpp"
#include "nhtori/rational.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace nhtori {

/// Product pi^e0 * 2^e1 * 3^e2 * Gamma(3/4)^e3 * Gamma(2/3)^e4 with rational
/// exponents.
struct ConstMonomial {
  enum Base { kPi = 0, kTwo = 1, kThree = 2, kGamma34 = 3, kGamma23 = 4 };
  static constexpr int kBases = 5;

  std::array<Rational, kBases> exp{};

  bool is_one() const;
  ConstMonomial operator*(const ConstMonomial& other) const;
  ConstMonomial pow(const Rational& e) const;

  friend bool operator==(const ConstMonomial& a, const ConstMonomial& b) { return a.exp == b.exp; }
  friend bool operator<(const ConstMonomial& a, const ConstMonomial& b);

  static const char* key(int base);
};

/// Exact scalar: finite rational combination of constant monomials. The
/// exponents of 2 and 3 are kept in [0, 1); integer parts live in the
/// rational coefficient.
class ConstScalar {
 public:
  using Term = std::pair<ConstMonomial, Rational>;

  ConstScalar() = default;
  ConstScalar(const Rational& q);  // NOLINT(google-explicit-constructor)
  ConstScalar(int q) : ConstScalar(Rational(q)) {}  // NOLINT(google-explicit-constructor)
  ConstScalar(const ConstMonomial& m, const Rational& coef);

  static ConstScalar pi();
  /// Gamma(z) for z with denominator dividing 4 or 6, z not a pole.
  static ConstScalar gamma(const Rational& z);
  /// q^e for a positive rational q; requires the non-{2,3} part of q to be a
  /// perfect power when e is fractional.
  static ConstScalar rational_power(const Rational& q, const Rational& e);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const;
  Rational to_rational() const;  // throws std::domain_error if not rational
  bool is_monomial() const { return terms_.size() == 1; }

  ConstScalar& operator+=(const ConstScalar& other);
  ConstScalar& operator-=(const ConstScalar& other);
  ConstScalar& operator*=(const ConstScalar& other);
  ConstScalar& operator/=(const ConstScalar& other);

  friend ConstScalar operator+(ConstScalar a, const ConstScalar& b) { return a += b; }
  friend ConstScalar operator-(ConstScalar a, const ConstScalar& b) { return a -= b; }
  friend ConstScalar operator*(const ConstScalar& a, const ConstScalar& b);
  friend ConstScalar operator/(ConstScalar a, const ConstScalar& b) { return a /= b; }
  friend ConstScalar operator-(const ConstScalar& a);
  friend bool operator==(const ConstScalar& a, const ConstScalar& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const ConstScalar& a, const ConstScalar& b) { return !(a == b); }

  /// Only monomial scalars are invertible in this ring.
  ConstScalar inverse() const;
  ConstScalar pow(long e) const;
  /// Fractional power of a monomial scalar with positive coefficient.
  ConstScalar pow(const Rational& e) const;

  /// Rigorous enclosure with endpoints rounded outward to `bits` bits.
  Interval enclosure(unsigned bits = 256) const;
  double to_double() const;

  /// Parser-compatible rendering, e.g. "3/2*pi^(3/2)*Gamma(3/4)^(-4)".
  std::string to_string() const;

 private:
  void add_term(ConstMonomial m, Rational c);

  std::vector<Term> terms_;
};

/// Enclosure of a single constant monomial.
Interval monomial_enclosure(const ConstMonomial& m, unsigned bits);

/// Default working precision for enclosures, in bits.
unsigned default_precision_bits();
void set_default_precision_bits(unsigned bits);

}  // namespace nhtori
