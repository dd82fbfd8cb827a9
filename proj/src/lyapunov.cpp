#include "nhtori/lyapunov.hpp"

#include "nhtori/ideal.hpp"
#include "nhtori/poly_parse.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nhtori {

using json = nlohmann::json;

namespace {

struct Truncator {
  std::vector<char> mask;
  int max_degree = -1;

  RatPoly mul(const RatPoly& a, const RatPoly& b) const { return RatPoly::multiply(a, b, mask, max_degree); }
  RatPoly cut(const RatPoly& a) const { return max_degree < 0 ? a : a.truncate(mask, max_degree); }
};

/// Homogeneous components keyed by degree; entry i is the coefficient of
/// x^(d-i) y^i as a polynomial in the parameters.
using Components = std::vector<std::vector<RatPoly>>;

Components split_state(const RatPoly& p, const VarList& pvars, const Truncator& tr) {
  const int ix = p.var_index("x");
  const int iy = p.var_index("y");
  std::vector<int> where(p.nvars(), -1);
  for (std::size_t v = 0; v < p.nvars(); ++v) {
    auto it = std::find(pvars->begin(), pvars->end(), (*p.vars())[v]);
    if (it != pvars->end()) where[v] = static_cast<int>(it - pvars->begin());
  }
  int maxd = 0;
  for (const auto& [e, c] : p.terms()) {
    int ex = ix >= 0 ? e[ix] : 0;
    int ey = iy >= 0 ? e[iy] : 0;
    if (ex < 0 || ey < 0) throw std::invalid_argument("state variables must appear with nonnegative exponents");
    maxd = std::max(maxd, ex + ey);
  }
  Components out(maxd + 1);
  for (int d = 0; d <= maxd; ++d) out[d].assign(d + 1, RatPoly(pvars));
  std::vector<std::vector<std::vector<RatPoly::Term>>> buckets(maxd + 1);
  for (int d = 0; d <= maxd; ++d) buckets[d].resize(d + 1);
  for (const auto& [e, c] : p.terms()) {
    int ex = ix >= 0 ? e[ix] : 0;
    int ey = iy >= 0 ? e[iy] : 0;
    RatPoly::Exponent pe(pvars->size(), 0);
    for (std::size_t v = 0; v < e.size(); ++v)
      if (where[v] >= 0) pe[where[v]] = e[v];
    buckets[ex + ey][ey].emplace_back(std::move(pe), c);
  }
  for (int d = 0; d <= maxd; ++d)
    for (int i = 0; i <= d; ++i) out[d][i] = tr.cut(RatPoly(pvars, std::move(buckets[d][i])));
  return out;
}

std::vector<std::string> collect_params(const std::vector<const RatPoly*>& ps) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const RatPoly* p : ps) {
    for (const auto& v : *p->vars()) {
      if (v == "x" || v == "y") continue;
      if (seen.insert(v).second) names.push_back(v);
    }
  }
  return names;
}

RatPoly bind_present(const RatPoly& p, const std::map<std::string, RatPoly>& values) {
  std::map<std::string, RatPoly> b;
  for (const auto& v : *p.vars()) {
    auto it = values.find(v);
    if (it != values.end()) b.insert(*it);
  }
  return b.empty() ? p : p.substitute(b);
}

}  // namespace

FocusQuantitySequence lyapunov_coefficients(const PlanarJordanSystem& sys, int k, const TruncationPolicy& policy) {
  if (k < 1) throw std::invalid_argument("need at least one focus quantity");
  if (policy.max_degree == 0) throw std::invalid_argument("truncation degree must be at least 1");
  if (!sys.tau.is_zero()) throw std::invalid_argument("focus quantities require tau = 0");
  sys.check_linear_part();
  RatPoly P = to_rational_poly(sys.xdot);
  RatPoly Q = to_rational_poly(sys.ydot);
  RatPoly om = to_rational_poly(sys.omega);
  if (om.size() != 1) throw std::invalid_argument("omega must be a nonzero monomial");

  VarList pvars = make_vars(collect_params({&P, &Q, &om}));
  Truncator tr;
  tr.max_degree = policy.max_degree;
  {
    RatPoly probe(pvars);
    tr.mask = policy.params.empty() ? std::vector<char>(pvars->size(), 1) : probe.mask_for(policy.params);
  }
  om = om.remap(pvars);
  const RatPoly om_inv = om.inverse_monomial();

  // nonlinear parts only; the linear part is the rotation
  Components Pc = split_state(P, pvars, tr);
  Components Qc = split_state(Q, pvars, tr);
  for (Components* c : {&Pc, &Qc}) {
    for (int d = 0; d < std::min<int>(2, c->size()); ++d)
      for (auto& v : (*c)[d]) v = RatPoly(pvars);
  }
  const int field_degree = static_cast<int>(std::max(Pc.size(), Qc.size())) - 1;

  const int nmax = 2 * k + 2;
  Components H(nmax + 1);
  H[2] = {RatPoly::constant(pvars, 1), RatPoly(pvars), RatPoly::constant(pvars, 1)};

  FocusQuantitySequence out;
  out.policy = policy;
  for (int N = 3; N <= nmax; ++N) {
    std::vector<RatPoly> s(N + 1, RatPoly(pvars));
    for (int kk = 2; kk <= N - 1; ++kk) {
      const int d = N - kk + 1;
      if (d > field_degree) continue;
      const auto& h = H[kk];
      for (int i = 0; i <= kk - 1; ++i) {
        // coefficients of x^(kk-1-i) y^i in dH/dx and dH/dy
        RatPoly hx = h[i] * Rational(kk - i);
        RatPoly hy = h[i + 1] * Rational(i + 1);
        for (int j = 0; j <= d; ++j) {
          const RatPoly* pj = d < static_cast<int>(Pc.size()) ? &Pc[d][j] : nullptr;
          const RatPoly* qj = d < static_cast<int>(Qc.size()) ? &Qc[d][j] : nullptr;
          if (!hx.is_zero() && pj && !pj->is_zero()) s[i + j] += tr.mul(hx, *pj);
          if (!hy.is_zero() && qj && !qj->is_zero()) s[i + j] += tr.mul(hy, *qj);
        }
      }
    }
    // omega [(j+1) f_{j+1} - (N-j+1) f_{j-1}] = V delta_{j0} - s_j
    std::vector<RatPoly> r(N + 1);
    for (int j = 0; j <= N; ++j) r[j] = tr.mul(-s[j], om_inv);
    std::vector<RatPoly> f(N + 1, RatPoly(pvars));
    auto forward = [&](int j) { f[j + 1] = (r[j] + f[j - 1] * Rational(N - j + 1)) / Rational(j + 1); };
    auto backward = [&](int j) { f[j - 1] = (f[j + 1] * Rational(j + 1) - r[j]) / Rational(N - j + 1); };
    f[N - 1] = -r[N];
    if (N % 2 == 1) {
      f[1] = r[0];
      for (int j = 2; j <= N - 1; j += 2) forward(j);
      for (int j = N - 2; j >= 1; j -= 2) backward(j);
    } else {
      for (int j = 1; j <= N - 1; j += 2) forward(j);
      for (int j = N - 2; j >= 2; j -= 2) backward(j);
      out.L.push_back(tr.cut(tr.mul(om, f[1]) + s[0]));
    }
    H[N] = std::move(f);
  }
  return out;
}

json FocusQuantitySequence::to_json() const {
  json Ls = json::array();
  for (const auto& l : L) Ls.push_back(l.to_string());
  json pol = {{"max_degree", policy.max_degree}, {"params", policy.params}};
  return {{"L", Ls}, {"policy", pol}, {"unit", nhtori::to_string(unit)}};
}

FocusQuantitySequence FocusQuantitySequence::from_json(const json& j) {
  FocusQuantitySequence out;
  for (const auto& s : j.at("L")) out.L.push_back(parse_rat_poly(s.get<std::string>()));
  if (j.contains("policy")) {
    out.policy.max_degree = j["policy"].value("max_degree", -1);
    out.policy.params = j["policy"].value("params", std::vector<std::string>{});
  }
  if (j.contains("unit")) out.unit = parse_rational(j["unit"].get<std::string>());
  return out;
}

ReversibilityWitness is_time_reversible(const PlanarJordanSystem& sys) {
  auto parity_ok = [](const MultiPoly& p, const std::string& var, int want) {
    int idx = p.var_index(var);
    for (const auto& [e, c] : p.terms()) {
      int ex = idx >= 0 ? e[idx] : 0;
      if (((ex % 2) + 2) % 2 != want) return false;
    }
    return true;
  };
  ReversibilityWitness w;
  if (parity_ok(sys.xdot, "x", 0) && parity_ok(sys.ydot, "x", 1)) {
    w.reversible = true;
    w.axis = "x";
  } else if (parity_ok(sys.xdot, "y", 1) && parity_ok(sys.ydot, "y", 0)) {
    w.reversible = true;
    w.axis = "y";
  }
  return w;
}

RatPoly homogeneous_part(const RatPoly& L, const std::map<std::string, Rational>& base, int d,
                         const std::vector<std::string>& params) {
  std::map<std::string, RatPoly> shift;
  for (const auto& [name, value] : base) {
    if (value == 0 || L.var_index(name) < 0) continue;
    shift[name] = RatPoly::variable(L.vars(), name) + RatPoly::constant(L.vars(), value);
  }
  RatPoly moved = shift.empty() ? L : L.substitute(shift);
  std::vector<char> mask = params.empty() ? std::vector<char>(moved.nvars(), 1) : moved.mask_for(params);
  return moved.homogeneous_component(mask, d);
}

RatPoly substitute_truncated(const RatPoly& p, const std::map<std::string, RatPoly>& values, int degree) {
  VarList all = p.vars();
  for (const auto& [name, v] : values) all = union_vars(all, v.vars());
  std::vector<std::string> targets;
  for (const auto& [name, v] : values)
    if (p.var_index(name) >= 0) targets.push_back(name);
  RatPoly base = p.remap(all);
  if (targets.empty()) return base.truncate(std::vector<char>(all->size(), 1), degree);
  std::vector<std::string> keep;
  for (const auto& v : *all)
    if (!values.count(v)) keep.push_back(v);
  VarList out_vars = make_vars(keep);
  std::vector<char> mask(out_vars->size(), 1);
  std::map<std::string, std::vector<RatPoly>> powers;
  for (const auto& name : targets) powers[name] = {RatPoly::constant(out_vars, 1)};
  auto power = [&](const std::string& name, int e) -> const RatPoly& {
    auto& pw = powers[name];
    while (static_cast<int>(pw.size()) <= e)
      pw.push_back(RatPoly::multiply(pw.back(), values.at(name).remap(out_vars), mask, degree));
    return pw[e];
  };
  std::vector<int> tidx;
  for (const auto& name : targets) tidx.push_back(all->size() ? static_cast<int>(std::find(all->begin(), all->end(), name) - all->begin()) : 0);
  std::vector<int> kidx;
  for (const auto& v : keep) kidx.push_back(static_cast<int>(std::find(all->begin(), all->end(), v) - all->begin()));

  RatPoly acc(out_vars);
  std::vector<RatPoly::Term> direct;
  for (const auto& [e, c] : base.terms()) {
    RatPoly::Exponent ke(keep.size());
    int w = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      ke[i] = e[kidx[i]];
      w += ke[i];
    }
    if (w > degree) continue;
    RatPoly term = RatPoly::monomial(out_vars, ke, c);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      int ex = e[tidx[t]];
      if (ex < 0) throw std::invalid_argument("cannot substitute into a negative power");
      if (ex > 0) term = RatPoly::multiply(term, power(targets[t], ex), mask, degree);
      if (term.is_zero()) break;
    }
    acc += term;
  }
  return acc;
}

std::map<std::string, RatPoly> solve_leading(const std::vector<RatPoly>& fs, const std::vector<std::string>& solve_for,
                                             int degree) {
  const std::size_t n = solve_for.size();
  if (fs.size() != n) throw std::invalid_argument("need as many equations as unknowns");
  VarList all = make_vars({});
  for (const auto& f : fs) all = union_vars(all, f.vars());
  for (const auto& s : solve_for) all = union_vars(all, make_vars({s}));
  std::vector<RatPoly> F;
  for (const auto& f : fs) F.push_back(f.remap(all));

  std::vector<int> sidx;
  for (const auto& s : solve_for) sidx.push_back(F[0].var_index(s));
  // linear coefficient matrix in the unknowns, remainder R = F - A s
  std::vector<std::vector<Rational>> A(n, std::vector<Rational>(n, 0));
  std::vector<RatPoly> R(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (F[i].constant_term() != 0) throw std::invalid_argument("equations must vanish at the base point");
    std::vector<RatPoly::Term> rest;
    for (const auto& [e, c] : F[i].terms()) {
      int total = 0;
      int which = -1;
      for (std::size_t v = 0; v < e.size(); ++v) total += e[v];
      if (total == 1)
        for (std::size_t j = 0; j < n; ++j)
          if (e[sidx[j]] == 1) which = static_cast<int>(j);
      if (which >= 0) {
        A[i][which] = c;
      } else {
        rest.emplace_back(e, c);
      }
    }
    R[i] = RatPoly(all, rest);
  }
  // inverse by Gauss-Jordan
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && A[piv][col] == 0) ++piv;
    if (piv == n) throw std::domain_error("linear part is singular in the chosen unknowns");
    std::swap(A[piv], A[col]);
    std::swap(inv[piv], inv[col]);
    Rational p = A[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      A[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || A[r][col] == 0) continue;
      Rational m = A[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        A[r][j] -= m * A[col][j];
        inv[r][j] -= m * inv[col][j];
      }
    }
  }
  std::vector<std::string> keep;
  for (const auto& v : *all)
    if (std::find(solve_for.begin(), solve_for.end(), v) == solve_for.end()) keep.push_back(v);
  VarList kv = make_vars(keep);
  std::map<std::string, RatPoly> sol;
  for (const auto& s : solve_for) sol[s] = RatPoly(kv);
  for (int iter = 0; iter <= degree; ++iter) {
    std::vector<RatPoly> Rv(n);
    for (std::size_t i = 0; i < n; ++i) Rv[i] = substitute_truncated(R[i], sol, degree).remap(kv);
    std::map<std::string, RatPoly> next;
    for (std::size_t j = 0; j < n; ++j) {
      RatPoly v(kv);
      for (std::size_t i = 0; i < n; ++i)
        if (inv[j][i] != 0) v -= Rv[i] * inv[j][i];
      next[solve_for[j]] = v;
    }
    if (next == sol) break;
    sol = std::move(next);
  }
  return sol;
}

double eval_double(const RatPoly& p, const std::map<std::string, double>& values) {
  std::vector<double> x(p.nvars(), 0.0);
  for (std::size_t i = 0; i < p.nvars(); ++i) {
    auto it = values.find((*p.vars())[i]);
    if (it == values.end()) {
      bool used = std::any_of(p.terms().begin(), p.terms().end(), [&](const auto& t) { return t.first[i] != 0; });
      if (used) throw std::invalid_argument("missing value for " + (*p.vars())[i]);
    } else {
      x[i] = it->second;
    }
  }
  double acc = 0;
  for (const auto& [e, c] : p.terms()) {
    double t = c.get_d();
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) t *= std::pow(x[i], e[i]);
    acc += t;
  }
  return acc;
}

json UnfoldStep::to_json() const {
  return {{"params", params},
          {"tau", tau},
          {"targets", targets},
          {"pattern", pattern},
          {"expected_cycles", expected_cycles}};
}

namespace {

int numeric_rank(std::vector<std::vector<double>> m, double tol) {
  int rank = 0;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows); ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < rows; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    if (std::fabs(m[piv][c]) <= tol) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      double f = m[r][c] / m[rank][c];
      for (std::size_t j = c; j < cols; ++j) m[r][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) throw std::domain_error("singular Jacobian in unfolding solve");
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

std::vector<UnfoldStep> schedule_from(const std::vector<RatPoly>& Ls, const std::map<std::string, double>& mu, int k,
                                      std::vector<std::string> vary, double ratio) {
  const int m = k - 1;
  std::vector<std::vector<RatPoly>> grad(m);
  std::vector<std::string> candidates;
  {
    std::set<std::string> seen;
    for (int i = 0; i < m; ++i)
      for (const auto& v : Ls[i].used_vars())
        if (seen.insert(v).second) candidates.push_back(v);
  }
  auto jac = [&](const std::vector<std::string>& vars, const std::map<std::string, double>& at) {
    std::vector<std::vector<double>> J(m, std::vector<double>(vars.size()));
    for (int i = 0; i < m; ++i)
      for (std::size_t j = 0; j < vars.size(); ++j)
        J[i][j] = Ls[i].var_index(vars[j]) < 0 ? 0.0 : eval_double(Ls[i].derivative(vars[j]), at);
    return J;
  };
  if (vary.empty() && m > 0) {
    for (const auto& c : candidates) {
      std::vector<std::string> trial = vary;
      trial.push_back(c);
      auto J = jac(trial, mu);
      std::vector<std::vector<double>> T(trial.size(), std::vector<double>(m));
      for (int i = 0; i < m; ++i)
        for (std::size_t j = 0; j < trial.size(); ++j) T[j][i] = J[i][j];
      if (numeric_rank(T, 1e-12) == static_cast<int>(trial.size())) vary = trial;
      if (static_cast<int>(vary.size()) == m) break;
    }
  }
  if (static_cast<int>(vary.size()) != m) throw std::domain_error("rank condition fails: cannot choose unfolding parameters");
  if (m > 0 && numeric_rank(jac(vary, mu), 1e-12) != m) throw std::domain_error("rank condition fails at mu*");

  const double Lk = eval_double(Ls[k - 1], mu);
  std::vector<double> targets(k, 0.0);
  std::vector<UnfoldStep> steps;
  double prev = Lk;
  for (int j = 1; j <= k; ++j) {
    double mag = std::fabs(Lk) * std::pow(ratio, j);
    targets[j - 1] = prev > 0 ? -mag : mag;
    prev = targets[j - 1];
    std::map<std::string, double> at = mu;
    // L_i(mu) = target for i = 1..m; level index of L_i is k-1-i
    for (int it = 0; it < 60 && m > 0; ++it) {
      std::vector<double> res(m);
      double norm = 0;
      for (int i = 0; i < m; ++i) {
        res[i] = -(eval_double(Ls[i], at) - targets[k - 1 - (i + 1)]);
        norm = std::max(norm, std::fabs(res[i]));
      }
      if (norm < 1e-15 * std::max(1.0, std::fabs(Lk))) break;
      auto dx = solve_dense(jac(vary, at), res);
      for (int v = 0; v < m; ++v) at[vary[v]] += dx[v];
    }
    UnfoldStep s;
    s.params = at;
    s.tau = targets[k - 1];
    s.targets = targets;
    std::ostringstream pat;
    for (int lvl = 0; lvl < k; ++lvl) {
      if (lvl) pat << ' ';
      if (lvl < k - 1) {
        pat << 'L' << (k - 1 - lvl);
      } else {
        pat << "tau";
      }
      pat << (targets[lvl] > 0 ? ">0" : targets[lvl] < 0 ? "<0" : "=0");
    }
    s.pattern = pat.str();
    s.expected_cycles = j;
    steps.push_back(std::move(s));
  }
  return steps;
}

}  // namespace

std::vector<UnfoldStep> unfold_schedule(const std::vector<RatPoly>& Ls, const std::map<std::string, Rational>& mu_star,
                                        int k, const UnfoldOptions& opts) {
  if (k < 1 || static_cast<int>(Ls.size()) < k) throw std::invalid_argument("need L_1..L_k");
  for (int i = 0; i < k; ++i) {
    for (const auto& v : Ls[i].used_vars())
      if (!mu_star.count(v)) throw std::domain_error("hypotheses unverifiable: no value for " + v);
    Rational val = Ls[i].evaluate(mu_star);
    if (i < k - 1 && val != 0) throw std::domain_error("hypotheses fail: L_" + std::to_string(i + 1) + "(mu*) != 0");
    if (i == k - 1 && val == 0) throw std::domain_error("hypotheses fail: L_" + std::to_string(k) + "(mu*) = 0");
  }
  std::map<std::string, double> mu;
  for (const auto& [n, v] : mu_star) mu[n] = v.get_d();
  auto steps = schedule_from(Ls, mu, k, opts.vary, opts.ratio);
  if (k > 1) {
    std::vector<std::string> vary;
    std::vector<RatPoly> lower(Ls.begin(), Ls.begin() + (k - 1));
    for (const auto& [n, v] : steps.back().params)
      if (mu.count(n) && steps.back().params.at(n) != mu.at(n)) vary.push_back(n);
    if (rank_at(lower, mu_star, vary) != k - 1) throw std::domain_error("rank condition fails at mu*");
  }
  return steps;
}

std::vector<UnfoldStep> unfold_schedule(const std::vector<RatPoly>& Ls, const std::map<std::string, double>& mu_star,
                                        int k, const UnfoldOptions& opts) {
  if (k < 1 || static_cast<int>(Ls.size()) < k) throw std::invalid_argument("need L_1..L_k");
  for (int i = 0; i < k - 1; ++i) {
    double v = eval_double(Ls[i], mu_star);
    if (std::fabs(v) > opts.zero_tolerance) throw std::domain_error("hypotheses fail: L_" + std::to_string(i + 1) + "(mu*) is not zero");
  }
  if (std::fabs(eval_double(Ls[k - 1], mu_star)) <= opts.zero_tolerance)
    throw std::domain_error("hypotheses fail: L_k(mu*) vanishes");
  return schedule_from(Ls, mu_star, k, opts.vary, opts.ratio);
}

}  // namespace nhtori
