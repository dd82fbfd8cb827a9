#pragma once

#include "nhtori/const_scalar.hpp"
#include "nhtori/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nhtori {

using VarList = std::shared_ptr<const std::vector<std::string>>;

VarList make_vars(std::vector<std::string> names);
VarList empty_vars();
/// Variables of a followed by those of b not already present.
VarList union_vars(const VarList& a, const VarList& b);
bool same_vars(const VarList& a, const VarList& b);

template <class C>
struct CoeffOps;

template <>
struct CoeffOps<Rational> {
  static bool is_zero(const Rational& c) { return sgn(c) == 0; }
  static Rational from_rational(const Rational& q) { return q; }
  static std::string to_string(const Rational& c) { return nhtori::to_string(c); }
  static bool is_compound(const Rational&) { return false; }
  static bool is_negative(const Rational& c) { return sgn(c) < 0; }
  static Rational inverse(const Rational& c) {
    if (sgn(c) == 0) throw std::domain_error("division by zero");
    return 1 / c;
  }
};

template <>
struct CoeffOps<ConstScalar> {
  static bool is_zero(const ConstScalar& c) { return c.is_zero(); }
  static ConstScalar from_rational(const Rational& q) { return ConstScalar(q); }
  static std::string to_string(const ConstScalar& c) { return c.to_string(); }
  static bool is_compound(const ConstScalar& c) { return c.terms().size() > 1; }
  static bool is_negative(const ConstScalar& c) { return c.terms().size() == 1 && c.terms()[0].second < 0; }
  static ConstScalar inverse(const ConstScalar& c) { return c.inverse(); }
};

/// Sparse multivariate Laurent polynomial over the coefficient ring C.
///
/// Terms are kept sorted by exponent vector (lexicographic on variable index)
/// with zero coefficients removed. Binary operations on polynomials with
/// different variable lists work over the union of the lists.
template <class C>
class BasicPoly {
 public:
  using Coeff = C;
  using Exponent = std::vector<int>;
  using Term = std::pair<Exponent, C>;

  BasicPoly() : vars_(empty_vars()) {}
  explicit BasicPoly(VarList vars) : vars_(std::move(vars)) {}
  BasicPoly(VarList vars, std::vector<Term> terms) : vars_(std::move(vars)), terms_(std::move(terms)) { normalize(); }

  static BasicPoly constant(VarList vars, const C& c) {
    BasicPoly p(std::move(vars));
    if (!CoeffOps<C>::is_zero(c)) p.terms_.emplace_back(Exponent(p.nvars(), 0), c);
    return p;
  }
  static BasicPoly constant(const C& c) { return constant(empty_vars(), c); }

  static BasicPoly variable(VarList vars, const std::string& name) {
    BasicPoly p(std::move(vars));
    int idx = p.var_index(name);
    if (idx < 0) throw std::invalid_argument("unknown variable: " + name);
    Exponent e(p.nvars(), 0);
    e[idx] = 1;
    p.terms_.emplace_back(std::move(e), CoeffOps<C>::from_rational(1));
    return p;
  }
  static BasicPoly variable(const std::string& name) { return variable(make_vars({name}), name); }

  static BasicPoly monomial(VarList vars, Exponent e, const C& c) {
    BasicPoly p(std::move(vars));
    if (e.size() != p.nvars()) throw std::invalid_argument("exponent length mismatch");
    if (!CoeffOps<C>::is_zero(c)) p.terms_.emplace_back(std::move(e), c);
    return p;
  }

  const VarList& vars() const { return vars_; }
  std::size_t nvars() const { return vars_->size(); }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  int var_index(const std::string& name) const {
    const auto& v = *vars_;
    auto it = std::find(v.begin(), v.end(), name);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && is_zero_exponent(terms_[0].first));
  }

  C constant_term() const { return coeff(Exponent(nvars(), 0)); }

  C coeff(const Exponent& e) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                               [](const Term& t, const Exponent& key) { return t.first < key; });
    if (it != terms_.end() && it->first == e) return it->second;
    return CoeffOps<C>::from_rational(0);
  }

  /// Variables that actually occur with a nonzero exponent.
  std::vector<std::string> used_vars() const {
    std::vector<bool> used(nvars(), false);
    for (const auto& t : terms_) {
      for (std::size_t i = 0; i < nvars(); ++i) used[i] = used[i] || t.first[i] != 0;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < nvars(); ++i) {
      if (used[i]) out.push_back((*vars_)[i]);
    }
    return out;
  }

  int degree(int idx) const {
    int d = 0;
    bool first = true;
    for (const auto& t : terms_) {
      if (first || t.first[idx] > d) d = t.first[idx];
      first = false;
    }
    return d;
  }

  int min_degree(int idx) const {
    int d = 0;
    bool first = true;
    for (const auto& t : terms_) {
      if (first || t.first[idx] < d) d = t.first[idx];
      first = false;
    }
    return d;
  }

  /// Total degree over the variables flagged in mask (all when mask is empty).
  int total_degree(const std::vector<char>& mask = {}) const {
    int best = 0;
    bool first = true;
    for (const auto& t : terms_) {
      int d = weight(t.first, mask);
      if (first || d > best) best = d;
      first = false;
    }
    return best;
  }

  /// Re-expresses the polynomial over another variable list; every variable
  /// that occurs must be present in the target list.
  BasicPoly remap(const VarList& target) const {
    if (same_vars(vars_, target)) return BasicPoly(target, terms_, kSorted);
    std::vector<int> where(nvars());
    for (std::size_t i = 0; i < nvars(); ++i) {
      const auto& t = *target;
      auto it = std::find(t.begin(), t.end(), (*vars_)[i]);
      where[i] = it == t.end() ? -1 : static_cast<int>(it - t.begin());
    }
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& [e, c] : terms_) {
      Exponent ne(target->size(), 0);
      for (std::size_t i = 0; i < nvars(); ++i) {
        if (e[i] == 0) continue;
        if (where[i] < 0) throw std::invalid_argument("variable dropped by remap: " + (*vars_)[i]);
        ne[where[i]] = e[i];
      }
      out.emplace_back(std::move(ne), c);
    }
    return BasicPoly(target, std::move(out));
  }

  BasicPoly& operator+=(const BasicPoly& other) { return *this = combine(*this, other, false); }
  BasicPoly& operator-=(const BasicPoly& other) { return *this = combine(*this, other, true); }
  BasicPoly& operator*=(const BasicPoly& other) { return *this = *this * other; }

  BasicPoly& operator*=(const C& c) {
    if (CoeffOps<C>::is_zero(c)) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.second = t.second * c;
    drop_zeros();
    return *this;
  }
  BasicPoly& operator/=(const C& c) { return *this *= CoeffOps<C>::inverse(c); }

  friend BasicPoly operator+(const BasicPoly& a, const BasicPoly& b) { return combine(a, b, false); }
  friend BasicPoly operator-(const BasicPoly& a, const BasicPoly& b) { return combine(a, b, true); }
  friend BasicPoly operator-(const BasicPoly& a) {
    BasicPoly out = a;
    for (auto& t : out.terms_) t.second = -t.second;
    return out;
  }
  friend BasicPoly operator*(const BasicPoly& a, const BasicPoly& b) { return multiply(a, b, {}, -1); }
  friend BasicPoly operator*(BasicPoly a, const C& c) { return a *= c; }
  friend BasicPoly operator*(const C& c, BasicPoly a) { return a *= c; }
  friend BasicPoly operator/(BasicPoly a, const C& c) { return a /= c; }
  friend BasicPoly operator+(const BasicPoly& a, const C& c) { return a + constant(a.vars_, c); }
  friend BasicPoly operator-(const BasicPoly& a, const C& c) { return a - constant(a.vars_, c); }

  friend bool operator==(const BasicPoly& a, const BasicPoly& b) {
    if (same_vars(a.vars_, b.vars_)) return a.terms_ == b.terms_;
    return (a - b).is_zero();
  }
  friend bool operator!=(const BasicPoly& a, const BasicPoly& b) { return !(a == b); }

  /// Product with all monomials whose masked degree exceeds max_degree
  /// dropped (max_degree < 0 disables truncation).
  static BasicPoly multiply(const BasicPoly& a, const BasicPoly& b, const std::vector<char>& mask, int max_degree) {
    if (a.is_zero() || b.is_zero()) return BasicPoly(union_vars(a.vars_, b.vars_));
    if (!same_vars(a.vars_, b.vars_)) {
      VarList u = union_vars(a.vars_, b.vars_);
      return multiply(a.remap(u), b.remap(u), mask, max_degree);
    }
    const std::size_t n = a.nvars();
    std::vector<Term> prod;
    prod.reserve(a.terms_.size() * b.terms_.size());
    std::vector<int> wb;
    if (max_degree >= 0) {
      wb.reserve(b.terms_.size());
      for (const auto& t : b.terms_) wb.push_back(weight(t.first, mask));
    }
    for (const auto& [ea, ca] : a.terms_) {
      int wa = max_degree >= 0 ? weight(ea, mask) : 0;
      for (std::size_t j = 0; j < b.terms_.size(); ++j) {
        if (max_degree >= 0 && wa + wb[j] > max_degree) continue;
        const auto& [eb, cb] = b.terms_[j];
        Exponent e(n);
        for (std::size_t i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
        prod.emplace_back(std::move(e), ca * cb);
      }
    }
    return BasicPoly(a.vars_, std::move(prod));
  }

  BasicPoly pow(unsigned e) const {
    BasicPoly result = constant(vars_, CoeffOps<C>::from_rational(1));
    BasicPoly base = *this;
    while (e > 0) {
      if (e & 1u) result *= base;
      e >>= 1u;
      if (e > 0) base *= base;
    }
    return result;
  }

  /// Inverse of a single-term polynomial with invertible coefficient.
  BasicPoly inverse_monomial() const {
    if (terms_.size() != 1) throw std::domain_error("only monomials are invertible");
    Exponent e = terms_[0].first;
    for (auto& v : e) v = -v;
    return monomial(vars_, std::move(e), CoeffOps<C>::inverse(terms_[0].second));
  }

  BasicPoly derivative(int idx) const {
    std::vector<Term> out;
    for (const auto& [e, c] : terms_) {
      if (e[idx] == 0) continue;
      Exponent ne = e;
      ne[idx] -= 1;
      out.emplace_back(std::move(ne), c * CoeffOps<C>::from_rational(e[idx]));
    }
    return BasicPoly(vars_, std::move(out), kSorted);
  }
  BasicPoly derivative(const std::string& name) const {
    int idx = var_index(name);
    if (idx < 0) return BasicPoly(vars_);
    return derivative(idx);
  }

  /// Exact composition; unbound variables are kept. Negative powers of a
  /// bound variable require a monomial binding.
  BasicPoly substitute(const std::map<std::string, BasicPoly>& bindings) const {
    std::vector<int> bound_idx;
    std::vector<const BasicPoly*> bound_val;
    VarList out_vars = vars_;
    for (const auto& [name, value] : bindings) {
      int idx = var_index(name);
      if (idx < 0) throw std::invalid_argument("unknown variable in substitution: " + name);
      bound_idx.push_back(idx);
      bound_val.push_back(&value);
      out_vars = union_vars(out_vars, value.vars_);
    }
    std::vector<std::map<int, BasicPoly>> powers(bound_idx.size());
    auto power_of = [&](std::size_t k, int e) -> const BasicPoly& {
      auto it = powers[k].find(e);
      if (it != powers[k].end()) return it->second;
      BasicPoly v = bound_val[k]->remap(out_vars);
      BasicPoly pw = e >= 0 ? v.pow(static_cast<unsigned>(e)) : v.inverse_monomial().pow(static_cast<unsigned>(-e));
      return powers[k].emplace(e, std::move(pw)).first->second;
    };
    BasicPoly self = remap(out_vars);
    std::vector<int> self_idx(bound_idx.size());
    for (std::size_t k = 0; k < bound_idx.size(); ++k) self_idx[k] = self.var_index((*vars_)[bound_idx[k]]);

    // Group terms by their bound-variable exponents.
    std::map<std::vector<int>, std::vector<Term>> groups;
    for (const auto& [e, c] : self.terms_) {
      std::vector<int> key(bound_idx.size());
      Exponent rest = e;
      for (std::size_t k = 0; k < bound_idx.size(); ++k) {
        key[k] = e[self_idx[k]];
        rest[self_idx[k]] = 0;
      }
      groups[key].emplace_back(std::move(rest), c);
    }
    BasicPoly result(out_vars);
    for (auto& [key, rest_terms] : groups) {
      BasicPoly part(out_vars, std::move(rest_terms));
      for (std::size_t k = 0; k < key.size(); ++k) {
        if (key[k] != 0) part *= power_of(k, key[k]);
      }
      result += part;
    }
    return result;
  }

  /// Substitutes scalar values for some variables.
  BasicPoly evaluate_partial(const std::map<std::string, C>& values) const {
    std::map<std::string, BasicPoly> bindings;
    for (const auto& [name, v] : values) {
      if (var_index(name) >= 0) bindings.emplace(name, constant(vars_, v));
    }
    return substitute(bindings);
  }

  /// Full evaluation; every occurring variable must be bound.
  C evaluate(const std::map<std::string, C>& values) const {
    std::vector<const C*> val(nvars(), nullptr);
    for (std::size_t i = 0; i < nvars(); ++i) {
      auto it = values.find((*vars_)[i]);
      if (it != values.end()) val[i] = &it->second;
    }
    C sum = CoeffOps<C>::from_rational(0);
    for (const auto& [e, c] : terms_) {
      C term = c;
      for (std::size_t i = 0; i < nvars(); ++i) {
        if (e[i] == 0) continue;
        if (val[i] == nullptr) throw std::invalid_argument("unbound variable: " + (*vars_)[i]);
        term = term * ipow(*val[i], e[i]);
      }
      sum = sum + term;
    }
    return sum;
  }

  /// Drops monomials whose masked degree exceeds max_degree.
  BasicPoly truncate(const std::vector<char>& mask, int max_degree) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      if (weight(t.first, mask) <= max_degree) out.push_back(t);
    }
    return BasicPoly(vars_, std::move(out), kSorted);
  }

  /// Keeps monomials of masked degree exactly d.
  BasicPoly homogeneous_component(const std::vector<char>& mask, int d) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      if (weight(t.first, mask) == d) out.push_back(t);
    }
    return BasicPoly(vars_, std::move(out), kSorted);
  }

  std::vector<char> mask_for(const std::vector<std::string>& names) const {
    std::vector<char> mask(nvars(), 0);
    for (const auto& n : names) {
      int idx = var_index(n);
      if (idx >= 0) mask[idx] = 1;
    }
    return mask;
  }

  template <class D, class F>
  BasicPoly<D> map_coeffs(F&& f) const {
    std::vector<typename BasicPoly<D>::Term> out;
    out.reserve(terms_.size());
    for (const auto& [e, c] : terms_) out.emplace_back(e, f(c));
    return BasicPoly<D>(vars_, std::move(out));
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [e, c] = *it;
      std::string cs = CoeffOps<C>::to_string(c);
      bool compound = CoeffOps<C>::is_compound(c);
      bool neg = !compound && CoeffOps<C>::is_negative(c);
      if (neg) cs = cs.substr(1);
      if (first) {
        if (neg) s += "-";
      } else {
        s += neg ? " - " : " + ";
      }
      first = false;
      std::string mono;
      for (std::size_t i = 0; i < nvars(); ++i) {
        if (e[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += (*vars_)[i];
        if (e[i] != 1) mono += e[i] > 0 ? "^" + std::to_string(e[i]) : "^(" + std::to_string(e[i]) + ")";
      }
      if (compound) cs = "(" + cs + ")";
      if (mono.empty()) {
        s += cs;
      } else if (cs == "1") {
        s += mono;
      } else {
        s += cs + "*" + mono;
      }
    }
    return s;
  }

 private:
  struct SortedTag {};
  static constexpr SortedTag kSorted{};
  BasicPoly(VarList vars, std::vector<Term> terms, SortedTag) : vars_(std::move(vars)), terms_(std::move(terms)) {
    drop_zeros();
  }

  static bool is_zero_exponent(const Exponent& e) {
    return std::all_of(e.begin(), e.end(), [](int v) { return v == 0; });
  }

  static int weight(const Exponent& e, const std::vector<char>& mask) {
    int d = 0;
    if (mask.empty()) {
      for (int v : e) d += v;
    } else {
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (mask[i]) d += e[i];
      }
    }
    return d;
  }

  static C ipow(const C& base, int e) {
    if (e < 0) return ipow(CoeffOps<C>::inverse(base), -e);
    C result = CoeffOps<C>::from_rational(1);
    for (int i = 0; i < e; ++i) result = result * base;
    return result;
  }

  void drop_zeros() {
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                [](const Term& t) { return CoeffOps<C>::is_zero(t.second); }),
                 terms_.end());
  }

  void normalize() {
    for (const auto& t : terms_) {
      if (t.first.size() != nvars()) throw std::invalid_argument("exponent length mismatch");
    }
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().first == t.first) {
        merged.back().second = merged.back().second + t.second;
      } else {
        if (!merged.empty() && CoeffOps<C>::is_zero(merged.back().second)) merged.pop_back();
        merged.push_back(std::move(t));
      }
    }
    if (!merged.empty() && CoeffOps<C>::is_zero(merged.back().second)) merged.pop_back();
    terms_ = std::move(merged);
  }

  static BasicPoly combine(const BasicPoly& a, const BasicPoly& b, bool subtract) {
    if (!same_vars(a.vars_, b.vars_)) {
      VarList u = union_vars(a.vars_, b.vars_);
      return combine(a.remap(u), b.remap(u), subtract);
    }
    std::vector<Term> out;
    out.reserve(a.terms_.size() + b.terms_.size());
    auto ia = a.terms_.begin();
    auto ib = b.terms_.begin();
    while (ia != a.terms_.end() || ib != b.terms_.end()) {
      if (ib == b.terms_.end() || (ia != a.terms_.end() && ia->first < ib->first)) {
        out.push_back(*ia++);
      } else if (ia == a.terms_.end() || ib->first < ia->first) {
        out.emplace_back(ib->first, subtract ? C(-ib->second) : ib->second);
        ++ib;
      } else {
        C c = subtract ? C(ia->second - ib->second) : C(ia->second + ib->second);
        if (!CoeffOps<C>::is_zero(c)) out.emplace_back(ia->first, std::move(c));
        ++ia;
        ++ib;
      }
    }
    return BasicPoly(a.vars_, std::move(out), kSorted);
  }

  VarList vars_;
  std::vector<Term> terms_;
};

using MultiPoly = BasicPoly<ConstScalar>;
using RatPoly = BasicPoly<Rational>;

MultiPoly to_multi(const RatPoly& p);
/// Throws std::domain_error when a coefficient is not rational.
RatPoly to_rational_poly(const MultiPoly& p);
bool is_rational_poly(const MultiPoly& p);

}  // namespace nhtori

namespace nhtori {

/// Terms of p whose exponents in the named variables equal the given
/// values, with those variables removed (set to exponent 0).
template <class C>
BasicPoly<C> coefficient_of(const BasicPoly<C>& p, const std::map<std::string, int>& exps) {
  std::vector<std::pair<int, int>> idx;
  for (const auto& [name, e] : exps) {
    int i = p.var_index(name);
    if (i < 0) {
      if (e != 0) return BasicPoly<C>(p.vars());
      continue;
    }
    idx.emplace_back(i, e);
  }
  std::vector<typename BasicPoly<C>::Term> out;
  for (const auto& [e, c] : p.terms()) {
    bool match = true;
    for (const auto& [i, v] : idx) match = match && e[i] == v;
    if (!match) continue;
    auto ne = e;
    for (const auto& [i, v] : idx) ne[i] = 0;
    out.emplace_back(std::move(ne), c);
  }
  return BasicPoly<C>(p.vars(), std::move(out));
}

}  // namespace nhtori
