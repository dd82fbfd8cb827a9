#include "nhtori/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace nhtori {

namespace {

Integer pow10(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

Rational parse_decimal(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw std::invalid_argument("malformed number: " + std::string(text));
  long exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    std::string exp_text(text.substr(pos + 1));
    std::size_t used = 0;
    exponent = std::stol(exp_text, &used);
    if (used != exp_text.size()) throw std::invalid_argument("malformed exponent: " + std::string(text));
    pos = text.size();
  }
  if (pos != text.size()) throw std::invalid_argument("malformed number: " + std::string(text));
  Integer mantissa(digits, 10);
  long scale = exponent - frac_digits;
  Rational q(mantissa);
  if (scale > 0) q *= pow10(static_cast<unsigned long>(scale));
  if (scale < 0) q /= pow10(static_cast<unsigned long>(-scale));
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    return num / den;
  }
  return parse_decimal(text);
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite double");
  Rational q;
  mpq_set_d(q.get_mpq_t(), value);
  return q;
}

Rational round_decimal(const Rational& q, unsigned digits) {
  Integer scale = pow10(digits);
  Rational scaled = q * scale;
  Integer num = scaled.get_num();
  Integer den = scaled.get_den();
  Integer twice = 2 * num;
  Integer sign = num < 0 ? Integer(-1) : Integer(1);
  Integer rounded = (twice + sign * den) / (2 * den);
  Rational result(rounded, scale);
  result.canonicalize();
  return result;
}

Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

Rational pow(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) throw std::domain_error("zero to negative power");
    return pow(Rational(1) / base, -exponent);
  }
  Integer num;
  Integer den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), static_cast<unsigned long>(exponent));
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Integer floor_int(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

}  // namespace nhtori

namespace nhtori {

Rational frac(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational frac(const Integer& num, const Integer& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace nhtori
