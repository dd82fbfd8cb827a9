#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace nhtori {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p", "p/q", "-p/q" or a decimal literal such as "1.25e-3" exactly.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form ("p" when q == 1).
std::string to_string(const Rational& q);

/// Exact conversion of a finite double.
Rational rational_from_double(double value);

/// Nearest rational with denominator 10^digits (round half away from zero).
Rational round_decimal(const Rational& q, unsigned digits);

/// num/den in canonical form (mpq_class(num, den) alone does not reduce).
Rational frac(long num, long den);
Rational frac(const Integer& num, const Integer& den);

Rational abs(const Rational& q);

Rational pow(const Rational& base, long exponent);

/// floor(q) as an integer.
Integer floor_int(const Rational& q);

}  // namespace nhtori
