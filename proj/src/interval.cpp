#include "nhtori/interval.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace nhtori {

namespace {

unsigned merge_precision(unsigned a, unsigned b) {
  if (a == 0) return b;
  if (b == 0) return a;
  return std::max(a, b);
}

}  // namespace

Rational round_to_bits(const Rational& q, unsigned bits, bool up) {
  mpfr_t tmp;
  mpfr_init2(tmp, static_cast<mpfr_prec_t>(bits));
  mpfr_set_q(tmp, q.get_mpq_t(), up ? MPFR_RNDU : MPFR_RNDD);
  Rational out;
  mpfr_get_q(out.get_mpq_t(), tmp);
  mpfr_clear(tmp);
  return out;
}

double to_double(const Rational& q) { return q.get_d(); }

Interval::Interval(const Rational& value, unsigned precision) : lo_(value), hi_(value), prec_(precision) {
  round_outward();
}

Interval::Interval(const Rational& lower, const Rational& upper, unsigned precision)
    : lo_(lower), hi_(upper), prec_(precision) {
  if (lo_ > hi_) throw std::invalid_argument("interval lower bound exceeds upper bound");
  round_outward();
}

void Interval::round_outward() {
  if (prec_ == 0) return;
  lo_ = round_to_bits(lo_, prec_, false);
  hi_ = round_to_bits(hi_, prec_, true);
}

Interval Interval::with_precision(unsigned precision) const { return Interval(lo_, hi_, precision); }

Rational Interval::magnitude() const { return std::max(nhtori::abs(lo_), nhtori::abs(hi_)); }

Rational Interval::mignitude() const {
  if (contains_zero()) return 0;
  return std::min(nhtori::abs(lo_), nhtori::abs(hi_));
}

Interval& Interval::operator+=(const Interval& other) {
  lo_ += other.lo_;
  hi_ += other.hi_;
  prec_ = merge_precision(prec_, other.prec_);
  round_outward();
  return *this;
}

Interval& Interval::operator-=(const Interval& other) {
  Rational lo = lo_ - other.hi_;
  hi_ = hi_ - other.lo_;
  lo_ = std::move(lo);
  prec_ = merge_precision(prec_, other.prec_);
  round_outward();
  return *this;
}

Interval& Interval::operator*=(const Interval& other) {
  if (lo_ == hi_ && other.lo_ == other.hi_) {
    lo_ *= other.lo_;
    hi_ = lo_;
  } else if (lo_ >= 0 && other.lo_ >= 0) {
    lo_ *= other.lo_;
    hi_ *= other.hi_;
  } else {
    Rational a = lo_ * other.lo_;
    Rational b = lo_ * other.hi_;
    Rational c = hi_ * other.lo_;
    Rational d = hi_ * other.hi_;
    lo_ = std::min({a, b, c, d});
    hi_ = std::max({a, b, c, d});
  }
  prec_ = merge_precision(prec_, other.prec_);
  round_outward();
  return *this;
}

Interval& Interval::operator/=(const Interval& other) {
  if (other.contains_zero()) throw std::domain_error("interval division by an interval containing zero");
  Interval inv(Rational(1) / other.hi_, Rational(1) / other.lo_, other.prec_);
  return *this *= inv;
}

Interval pow(const Interval& base, unsigned exponent) {
  if (exponent == 0) return Interval(Rational(1), base.precision());
  if (exponent % 2 == 0) {
    Rational lo = base.mignitude();
    Rational hi = base.magnitude();
    return Interval(pow(lo, static_cast<long>(exponent)), pow(hi, static_cast<long>(exponent)), base.precision());
  }
  return Interval(pow(base.lower(), static_cast<long>(exponent)), pow(base.upper(), static_cast<long>(exponent)), base.precision());
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lower(), b.lower()), std::max(a.upper(), b.upper()),
                  std::max(a.precision(), b.precision()));
}

Interval abs(const Interval& a) {
  if (a.lower() >= 0) return a;
  if (a.upper() <= 0) return -a;
  return Interval(Rational(0), a.magnitude(), a.precision());
}

std::string to_sci_string(const Rational& q, int digits) {
  mpfr_t tmp;
  mpfr_init2(tmp, 256);
  mpfr_set_q(tmp, q.get_mpq_t(), MPFR_RNDN);
  char buffer[256];
  mpfr_snprintf(buffer, sizeof buffer, "%.*Re", digits - 1, tmp);
  mpfr_clear(tmp);
  return buffer;
}

std::string to_sci_string(const Interval& x, int digits) {
  mpfr_t lo;
  mpfr_t hi;
  mpfr_init2(lo, 256);
  mpfr_init2(hi, 256);
  mpfr_set_q(lo, x.lower().get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi, x.upper().get_mpq_t(), MPFR_RNDU);
  char buffer[512];
  mpfr_snprintf(buffer, sizeof buffer, "[%.*RDe, %.*RUe]", digits - 1, lo, digits - 1, hi);
  mpfr_clear(lo);
  mpfr_clear(hi);
  return buffer;
}

std::ostream& operator<<(std::ostream& os, const Interval& x) { return os << to_sci_string(x, 12); }

}  // namespace nhtori

namespace nhtori {

namespace {

// floor and ceil of sqrt(q) * 2^bits as integers
std::pair<Integer, Integer> scaled_sqrt(const Rational& q, unsigned bits) {
  Integer num = q.get_num();
  Integer den = q.get_den();
  Integer scaled = num * den;
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * bits);
  Integer root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  // sqrt(num / den) = sqrt(num * den) / den
  Integer lo = root;
  Integer hi = root * root == scaled ? root : Integer(root + 1);
  return {lo, hi};
}

}  // namespace

Interval sqrt(const Interval& a, unsigned bits) {
  if (a.lower() < 0) throw std::domain_error("sqrt of an interval with negative part");
  auto [llo, lhi] = scaled_sqrt(a.lower(), bits);
  auto [ulo, uhi] = scaled_sqrt(a.upper(), bits);
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
  Rational lo = Rational(llo) / (Rational(scale) * Rational(a.lower().get_den()));
  Rational hi = Rational(uhi) / (Rational(scale) * Rational(a.upper().get_den()));
  lo.canonicalize();
  hi.canonicalize();
  return Interval(lo, hi);
}

std::array<Interval, 2> quadratic_roots(const Rational& a, const Rational& b, const Rational& c, unsigned bits) {
  if (a == 0) throw std::invalid_argument("leading coefficient vanishes");
  Rational disc = b * b - 4 * a * c;
  if (disc <= 0) throw std::domain_error("quadratic has no two distinct real roots");
  Interval s = sqrt(Interval(disc), bits);
  Interval two_a(2 * a);
  Interval r1 = (Interval(-b) - s) / two_a;
  Interval r2 = (Interval(-b) + s) / two_a;
  if (a < 0) std::swap(r1, r2);
  return {r1, r2};
}

}  // namespace nhtori
