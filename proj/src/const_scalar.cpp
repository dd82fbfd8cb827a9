#include "nhtori/const_scalar.hpp"

#include <mpfr.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace nhtori {

namespace {

std::atomic<unsigned> g_default_bits{256};

Rational int_pow(const Rational& base, const Integer& e) {
  long k = e.get_si();
  return pow(base, k);
}

// Largest v-th root test: returns true and sets root when z is a perfect v-th power.
bool exact_root(const Integer& z, unsigned long v, Integer& root) {
  if (z < 0) return false;
  return mpz_root(root.get_mpz_t(), z.get_mpz_t(), v) != 0;
}

unsigned strip(Integer& z, unsigned long p) {
  unsigned count = 0;
  while (z != 0 && mpz_divisible_ui_p(z.get_mpz_t(), p)) {
    z /= p;
    ++count;
  }
  return count;
}

class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t p) { mpfr_init2(v_, p); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

// Evaluates base^e in round-to-nearest at precision p and multiplies into acc.
void mul_power(mpfr_ptr acc, mpfr_srcptr base, const Rational& e, mpfr_prec_t p) {
  if (e == 0) return;
  Mpfr ex(p);
  Mpfr t(p);
  mpfr_set_q(ex.get(), e.get_mpq_t(), MPFR_RNDN);
  mpfr_pow(t.get(), base, ex.get(), MPFR_RNDN);
  mpfr_mul(acc, acc, t.get(), MPFR_RNDN);
}

}  // namespace

unsigned default_precision_bits() { return g_default_bits.load(); }
void set_default_precision_bits(unsigned bits) { g_default_bits.store(std::max(bits, 64u)); }

bool ConstMonomial::is_one() const {
  return std::all_of(exp.begin(), exp.end(), [](const Rational& e) { return e == 0; });
}

ConstMonomial ConstMonomial::operator*(const ConstMonomial& other) const {
  ConstMonomial out;
  for (int i = 0; i < kBases; ++i) out.exp[i] = exp[i] + other.exp[i];
  return out;
}

ConstMonomial ConstMonomial::pow(const Rational& e) const {
  ConstMonomial out;
  for (int i = 0; i < kBases; ++i) out.exp[i] = exp[i] * e;
  return out;
}

bool operator<(const ConstMonomial& a, const ConstMonomial& b) {
  for (int i = 0; i < ConstMonomial::kBases; ++i) {
    if (a.exp[i] != b.exp[i]) return a.exp[i] < b.exp[i];
  }
  return false;
}

const char* ConstMonomial::key(int base) {
  static const char* keys[kBases] = {"pi", "2", "3", "gamma_3_4", "gamma_2_3"};
  return keys[base];
}

ConstScalar::ConstScalar(const Rational& q) {
  if (q != 0) terms_.emplace_back(ConstMonomial{}, q);
}

ConstScalar::ConstScalar(const ConstMonomial& m, const Rational& coef) { add_term(m, coef); }

void ConstScalar::add_term(ConstMonomial m, Rational c) {
  if (c == 0) return;
  for (int base : {ConstMonomial::kTwo, ConstMonomial::kThree}) {
    Integer fl = floor_int(m.exp[base]);
    if (fl != 0) {
      c *= int_pow(Rational(base == ConstMonomial::kTwo ? 2 : 3), fl);
      m.exp[base] -= fl;
    }
  }
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const ConstMonomial& key) { return t.first < key; });
  if (it != terms_.end() && it->first == m) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  } else {
    terms_.insert(it, Term{std::move(m), std::move(c)});
  }
}

ConstScalar ConstScalar::pi() {
  ConstMonomial m;
  m.exp[ConstMonomial::kPi] = 1;
  return ConstScalar(m, 1);
}

ConstScalar ConstScalar::rational_power(const Rational& q, const Rational& e) {
  if (e.get_den() == 1) return ConstScalar(nhtori::pow(q, e.get_num().get_si()));
  if (q <= 0) throw std::domain_error("fractional power of a non-positive rational");
  Integer num = q.get_num();
  Integer den = q.get_den();
  long a = static_cast<long>(strip(num, 2)) - static_cast<long>(strip(den, 2));
  long b = static_cast<long>(strip(num, 3)) - static_cast<long>(strip(den, 3));
  unsigned long v = e.get_den().get_ui();
  Integer rn;
  Integer rd;
  if (!exact_root(num, v, rn) || !exact_root(den, v, rd)) {
    throw std::domain_error("power leaves the constant basis: " + nhtori::to_string(q) + "^" +
                            nhtori::to_string(e));
  }
  Rational rest(rn, rd);
  rest.canonicalize();
  ConstMonomial m;
  m.exp[ConstMonomial::kTwo] = Rational(a) * e;
  m.exp[ConstMonomial::kThree] = Rational(b) * e;
  return ConstScalar(m, nhtori::pow(rest, e.get_num().get_si()));
}

ConstScalar ConstScalar::gamma(const Rational& z) {
  Integer k = floor_int(z);
  Rational f = z - Rational(k);
  if (f == 0) {
    f = 1;
    k -= 1;
  }
  ConstMonomial m;
  Rational coef = 1;
  using B = ConstMonomial;
  if (f == 1) {
  } else if (f == frac(1, 2)) {
    m.exp[B::kPi] = frac(1, 2);
  } else if (f == frac(3, 4)) {
    m.exp[B::kGamma34] = 1;
  } else if (f == frac(1, 4)) {
    m.exp[B::kPi] = 1;
    m.exp[B::kTwo] = frac(1, 2);
    m.exp[B::kGamma34] = -1;
  } else if (f == frac(2, 3)) {
    m.exp[B::kGamma23] = 1;
  } else if (f == frac(1, 3)) {
    coef = 2;
    m.exp[B::kPi] = 1;
    m.exp[B::kThree] = frac(-1, 2);
    m.exp[B::kGamma23] = -1;
  } else if (f == frac(1, 6)) {
    m.exp[B::kTwo] = frac(5, 3);
    m.exp[B::kPi] = frac(3, 2);
    m.exp[B::kThree] = frac(-1, 2);
    m.exp[B::kGamma23] = -2;
  } else if (f == frac(5, 6)) {
    m.exp[B::kTwo] = frac(-2, 3);
    m.exp[B::kPi] = frac(-1, 2);
    m.exp[B::kThree] = frac(1, 2);
    m.exp[B::kGamma23] = 2;
  } else {
    throw std::domain_error("Gamma(" + nhtori::to_string(z) + ") is outside the constant basis");
  }
  // Gamma(f + k) = Gamma(f) * prod_{i<k} (f + i); negative k divides.
  if (k > 0) {
    for (Integer i = 0; i < k; ++i) coef *= f + Rational(i);
  } else {
    for (Integer i = -1; i >= k; --i) {
      Rational factor = f + Rational(i);
      if (factor == 0) throw std::domain_error("Gamma pole");
      coef /= factor;
    }
  }
  return ConstScalar(m, coef);
}

bool ConstScalar::is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one()); }

Rational ConstScalar::to_rational() const {
  if (!is_rational()) throw std::domain_error("transcendental residue in " + to_string());
  return terms_.empty() ? Rational(0) : terms_[0].second;
}

ConstScalar& ConstScalar::operator+=(const ConstScalar& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

ConstScalar& ConstScalar::operator-=(const ConstScalar& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

ConstScalar operator*(const ConstScalar& a, const ConstScalar& b) {
  ConstScalar out;
  if (a.is_rational() && b.is_rational()) {
    if (!a.is_zero() && !b.is_zero()) out.terms_.emplace_back(ConstMonomial{}, a.terms_[0].second * b.terms_[0].second);
    return out;
  }
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
  }
  return out;
}

ConstScalar& ConstScalar::operator*=(const ConstScalar& other) { return *this = *this * other; }

ConstScalar& ConstScalar::operator/=(const ConstScalar& other) { return *this *= other.inverse(); }

ConstScalar operator-(const ConstScalar& a) {
  ConstScalar out = a;
  for (auto& t : out.terms_) t.second = -t.second;
  return out;
}

ConstScalar ConstScalar::inverse() const {
  if (terms_.size() != 1) {
    throw std::domain_error(terms_.empty() ? "division by zero" : "division by a non-monomial constant " + to_string());
  }
  return ConstScalar(terms_[0].first.pow(-1), 1 / terms_[0].second);
}

ConstScalar ConstScalar::pow(long e) const {
  if (e < 0) return inverse().pow(-e);
  ConstScalar result(1);
  ConstScalar base = *this;
  while (e > 0) {
    if (e & 1) result *= base;
    e >>= 1;
    if (e > 0) base *= base;
  }
  return result;
}

ConstScalar ConstScalar::pow(const Rational& e) const {
  if (e.get_den() == 1) return pow(e.get_num().get_si());
  if (terms_.size() != 1) throw std::domain_error("fractional power of a non-monomial constant");
  return rational_power(terms_[0].second, e) * ConstScalar(terms_[0].first.pow(e), 1);
}

Interval monomial_enclosure(const ConstMonomial& m, unsigned bits) {
  static std::mutex mutex;
  static std::map<std::pair<ConstMonomial, unsigned>, Interval> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find({m, bits});
    if (it != cache.end()) return it->second;
  }
  const mpfr_prec_t p = static_cast<mpfr_prec_t>(bits + 64);
  Mpfr acc(p);
  Mpfr base(p);
  mpfr_set_ui(acc.get(), 1, MPFR_RNDN);
  mpfr_const_pi(base.get(), MPFR_RNDN);
  mul_power(acc.get(), base.get(), m.exp[ConstMonomial::kPi], p);
  mpfr_set_ui(base.get(), 2, MPFR_RNDN);
  mul_power(acc.get(), base.get(), m.exp[ConstMonomial::kTwo], p);
  mpfr_set_ui(base.get(), 3, MPFR_RNDN);
  mul_power(acc.get(), base.get(), m.exp[ConstMonomial::kThree], p);
  mpfr_set_ui(base.get(), 3, MPFR_RNDN);
  mpfr_div_ui(base.get(), base.get(), 4, MPFR_RNDN);
  mpfr_gamma(base.get(), base.get(), MPFR_RNDN);
  mul_power(acc.get(), base.get(), m.exp[ConstMonomial::kGamma34], p);
  mpfr_set_ui(base.get(), 2, MPFR_RNDN);
  mpfr_div_ui(base.get(), base.get(), 3, MPFR_RNDN);
  mpfr_gamma(base.get(), base.get(), MPFR_RNDN);
  mul_power(acc.get(), base.get(), m.exp[ConstMonomial::kGamma23], p);

  // A few dozen correctly rounded operations at bits+64: relative error far
  // below the 2^-(bits+32) widening applied here.
  Rational v;
  mpfr_get_q(v.get_mpq_t(), acc.get());
  Rational slack = abs(v) / pow(Rational(2), static_cast<long>(bits + 32));
  Interval out(v - slack, v + slack, bits);
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(std::make_pair(m, bits), out);
  return out;
}

Interval ConstScalar::enclosure(unsigned bits) const {
  Interval sum(Rational(0), bits);
  for (const auto& [m, c] : terms_) {
    if (m.is_one()) {
      sum += Interval(c, bits);
    } else {
      sum += monomial_enclosure(m, bits) * Interval(c);
    }
  }
  return sum;
}

double ConstScalar::to_double() const {
  if (is_rational()) return to_rational().get_d();
  return enclosure(128).midpoint().get_d();
}

std::string ConstScalar::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    bool need_star = false;
    if (mag != 1 || m.is_one()) {
      os << nhtori::to_string(mag);
      need_star = true;
    }
    for (int b = 0; b < ConstMonomial::kBases; ++b) {
      const Rational& e = m.exp[b];
      if (e == 0) continue;
      if (need_star) os << "*";
      need_star = true;
      switch (b) {
        case ConstMonomial::kPi: os << "pi"; break;
        case ConstMonomial::kTwo: os << "2"; break;
        case ConstMonomial::kThree: os << "3"; break;
        case ConstMonomial::kGamma34: os << "Gamma(3/4)"; break;
        default: os << "Gamma(2/3)"; break;
      }
      if (e != 1) {
        if (e.get_den() == 1 && e > 0) {
          os << "^" << nhtori::to_string(e);
        } else {
          os << "^(" << nhtori::to_string(e) << ")";
        }
      }
    }
  }
  return os.str();
}

}  // namespace nhtori
