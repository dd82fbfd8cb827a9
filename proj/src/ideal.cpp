#include "nhtori/ideal.hpp"

#include "nhtori/poly_eval.hpp"

#include <stdexcept>

namespace nhtori {

namespace {

// Variable permutation giving the comparison sequence for the order.
std::vector<int> order_permutation(const VarList& vars, const OrderSpec& order) {
  std::vector<int> perm;
  std::vector<bool> taken(vars->size(), false);
  for (const auto& name : order.priority) {
    for (std::size_t i = 0; i < vars->size(); ++i) {
      if ((*vars)[i] == name && !taken[i]) {
        perm.push_back(static_cast<int>(i));
        taken[i] = true;
      }
    }
  }
  for (std::size_t i = 0; i < vars->size(); ++i) {
    if (!taken[i]) perm.push_back(static_cast<int>(i));
  }
  return perm;
}

struct Compare {
  MonomialOrder kind;
  std::vector<int> perm;

  // true when a > b
  bool greater(const std::vector<int>& a, const std::vector<int>& b) const {
    if (kind != MonomialOrder::kLex) {
      int da = 0;
      int db = 0;
      for (int i : perm) {
        da += a[i];
        db += b[i];
      }
      if (da != db) return da > db;
    }
    if (kind == MonomialOrder::kGrevLex) {
      for (auto it = perm.rbegin(); it != perm.rend(); ++it) {
        if (a[*it] != b[*it]) return a[*it] < b[*it];
      }
      return false;
    }
    for (int i : perm) {
      if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
  }
};

std::size_t leading_index(const RatPoly& p, const Compare& cmp) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.terms().size(); ++i) {
    if (cmp.greater(p.terms()[i].first, p.terms()[best].first)) best = i;
  }
  return best;
}

bool divides(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

// Monomial x^s with s = max(0, -min exponent) per variable, making p*x^s polynomial.
std::vector<int> clearing_shift(const RatPoly& p) {
  std::vector<int> s(p.nvars(), 0);
  for (std::size_t i = 0; i < p.nvars(); ++i) s[i] = std::max(0, -p.min_degree(static_cast<int>(i)));
  return s;
}

RatPoly monomial(const VarList& vars, std::vector<int> e, int sign = 1) {
  return RatPoly::monomial(vars, std::move(e), Rational(sign));
}

std::vector<int> negate(std::vector<int> e) {
  for (auto& v : e) v = -v;
  return e;
}

}  // namespace

DivisionResult reduce_mod_ideal(const RatPoly& p_in, const std::vector<RatPoly>& gens_in, const OrderSpec& order) {
  if (gens_in.empty()) throw std::invalid_argument("reduce_mod_ideal needs at least one generator");
  VarList vars = p_in.vars();
  for (const auto& g : gens_in) vars = union_vars(vars, g.vars());
  RatPoly p = p_in.remap(vars);
  std::vector<RatPoly> gens;
  std::vector<std::vector<int>> gshift;
  for (const auto& g : gens_in) {
    RatPoly gg = g.remap(vars);
    auto s = clearing_shift(gg);
    gens.push_back(gg * monomial(vars, s));
    gshift.push_back(std::move(s));
  }
  auto pshift = clearing_shift(p);
  RatPoly work = p * monomial(vars, pshift);

  Compare cmp{order.kind, order_permutation(vars, order)};
  std::vector<std::size_t> lead;
  for (const auto& g : gens) {
    if (g.is_zero()) throw std::invalid_argument("zero generator");
    lead.push_back(leading_index(g, cmp));
  }

  std::vector<std::vector<RatPoly::Term>> qterms(gens.size());
  std::vector<RatPoly::Term> rterms;
  while (!work.is_zero()) {
    std::size_t li = leading_index(work, cmp);
    const auto lt = work.terms()[li];
    bool reduced = false;
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const auto& [ge, gc] = gens[k].terms()[lead[k]];
      if (!divides(ge, lt.first)) continue;
      std::vector<int> qe(lt.first.size());
      for (std::size_t i = 0; i < qe.size(); ++i) qe[i] = lt.first[i] - ge[i];
      Rational qc = lt.second / gc;
      RatPoly q = RatPoly::monomial(vars, qe, qc);
      work -= q * gens[k];
      qterms[k].emplace_back(std::move(qe), std::move(qc));
      reduced = true;
      break;
    }
    if (!reduced) {
      rterms.push_back(lt);
      work -= RatPoly::monomial(vars, lt.first, lt.second);
    }
  }

  // Undo the clearing monomials: p = sum (q_k x^{gs_k - ps}) g_k + r x^{-ps}.
  DivisionResult out;
  RatPoly unshift = monomial(vars, negate(pshift));
  out.remainder = RatPoly(vars, std::move(rterms)) * unshift;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    out.quotients.push_back(RatPoly(vars, std::move(qterms[k])) * monomial(vars, gshift[k]) * unshift);
  }
  return out;
}

bool equal_up_to_unit(const RatPoly& a, const RatPoly& b, Rational* unit) {
  if (a.is_zero() || b.is_zero()) {
    if (unit != nullptr) *unit = 1;
    return a.is_zero() && b.is_zero();
  }
  VarList vars = union_vars(a.vars(), b.vars());
  RatPoly aa = a.remap(vars);
  RatPoly bb = b.remap(vars);
  if (aa.size() != bb.size()) return false;
  Rational ratio = aa.terms()[0].second / bb.terms()[0].second;
  for (std::size_t i = 0; i < aa.size(); ++i) {
    if (aa.terms()[i].first != bb.terms()[i].first) return false;
    if (aa.terms()[i].second != ratio * bb.terms()[i].second) return false;
  }
  if (unit != nullptr) *unit = ratio;
  return true;
}

int rational_rank(std::vector<std::vector<Rational>> rows) {
  int rank = 0;
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      Rational f = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

int rank_at(const std::vector<RatPoly>& fs, const std::map<std::string, Rational>& point,
            const std::vector<std::string>& vars) {
  std::vector<std::vector<Rational>> rows;
  for (const auto& f : fs) {
    std::vector<Rational> row;
    for (const auto& v : vars) row.push_back(f.derivative(v).evaluate(point));
    rows.push_back(std::move(row));
  }
  return rational_rank(std::move(rows));
}

int rank_at(const std::vector<MultiPoly>& fs, const std::map<std::string, Rational>& point,
            const std::vector<std::string>& vars) {
  std::vector<std::vector<Rational>> rows;
  std::map<std::string, ConstScalar> cpoint;
  for (const auto& [k, v] : point) cpoint.emplace(k, ConstScalar(v));
  for (const auto& f : fs) {
    std::vector<Rational> row;
    for (const auto& v : vars) {
      ConstScalar entry = f.derivative(v).evaluate(cpoint);
      if (!entry.is_rational()) {
        throw std::domain_error("rank_at: Jacobian entry is not rational at the point (" + entry.to_string() +
                                "); use interval_rank_lower_bound");
      }
      row.push_back(entry.to_rational());
    }
    rows.push_back(std::move(row));
  }
  return rational_rank(std::move(rows));
}

int interval_rank_lower_bound(const IntervalMatrix& m) {
  IntervalMatrix a = m;
  std::vector<bool> row_used(a.rows, false);
  int rank = 0;
  for (std::size_t c = 0; c < a.cols; ++c) {
    std::size_t best = a.rows;
    Rational best_mig = 0;
    for (std::size_t r = 0; r < a.rows; ++r) {
      if (row_used[r]) continue;
      Rational mig = a(r, c).mignitude();
      if (mig > best_mig) {
        best_mig = mig;
        best = r;
      }
    }
    if (best == a.rows) continue;
    row_used[best] = true;
    ++rank;
    for (std::size_t r = 0; r < a.rows; ++r) {
      if (row_used[r]) continue;
      Interval f = a(r, c) / a(best, c);
      for (std::size_t k = c; k < a.cols; ++k) a(r, k) -= f * a(best, k);
    }
  }
  return rank;
}

}  // namespace nhtori

namespace nhtori {

RatPoly univariate_gcd(RatPoly a, RatPoly b, const std::string& var) {
  for (const RatPoly* p : {&a, &b})
    for (const auto& v : p->used_vars())
      if (v != var) throw std::invalid_argument("univariate_gcd: unexpected variable " + v);
  while (!b.is_zero()) {
    RatPoly r = reduce_mod_ideal(a, {b}, {MonomialOrder::kLex, {var}}).remainder;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  int idx = a.var_index(var);
  const RatPoly::Term* lead = &a.terms()[0];
  for (const auto& t : a.terms())
    if (idx >= 0 && t.first[idx] > lead->first[idx]) lead = &t;
  return a / lead->second;
}

}  // namespace nhtori
