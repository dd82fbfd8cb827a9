#include "nhtori/hopfprep.hpp"

#include "nhtori/poly_json.hpp"
#include "nhtori/poly_parse.hpp"

namespace nhtori {

using nlohmann::json;

namespace {

MultiPoly bind_vars(const MultiPoly& p, const std::map<std::string, MultiPoly>& values) {
  std::map<std::string, MultiPoly> used;
  for (const auto& [name, v] : values) {
    if (p.var_index(name) >= 0) used.emplace(name, v);
  }
  return used.empty() ? p : p.substitute(used);
}

MultiPoly at_point(const MultiPoly& p, const MultiPoly& rho, const MultiPoly& w0) {
  return bind_vars(p, {{"r", rho}, {"w", w0}});
}

bool mentions(const MultiPoly& p, const std::string& name) {
  int i = p.var_index(name);
  if (i < 0) return false;
  for (const auto& [e, c] : p.terms()) {
    if (e[i] != 0) return true;
  }
  return false;
}

/// Solves eq = 0 for the variable p, which must occur linearly with a monomial
/// coefficient.
MultiPoly solve_linear(const MultiPoly& eq, const std::string& p, const std::string& what) {
  if (!mentions(eq, p)) {
    throw DegenerateNormalization("degenerate normalization: " + p + " does not enter the " + what + " condition");
  }
  int i = eq.var_index(p);
  if (eq.degree(i) > 1 || eq.min_degree(i) < 0) {
    throw std::invalid_argument(p + " enters the " + what + " condition nonlinearly");
  }
  MultiPoly alpha = coefficient_of(eq, {{p, 1}});
  MultiPoly beta = coefficient_of(eq, {{p, 0}});
  if (alpha.size() != 1) {
    throw std::invalid_argument("coefficient of " + p + " in the " + what + " condition is not a monomial: " +
                                alpha.to_string());
  }
  return -(beta * alpha.inverse_monomial());
}

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  Integer num = q.get_num();
  Integer den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) return std::nullopt;
  Integer sn = sqrt(num);
  Integer sd = sqrt(den);
  return frac(sn, sd);
}

MultiPoly state_first(const MultiPoly& p) {
  std::vector<std::string> names = {"x", "y"};
  for (const auto& v : *p.vars()) {
    if (v != "x" && v != "y") names.push_back(v);
  }
  return p.remap(make_vars(names));
}

std::string poly_string(const MultiPoly& p) { return p.to_string(); }

}  // namespace

std::array<std::array<MultiPoly, 2>, 2> jacobian_at(const GuidingSystem& g, const MultiPoly& rho, const MultiPoly& w0) {
  std::array<std::array<MultiPoly, 2>, 2> J;
  const MultiPoly* comps[2] = {&g.g1, &g.g2};
  const char* state[2] = {"r", "w"};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) J[i][j] = at_point(comps[i]->derivative(state[j]), rho, w0);
  }
  return J;
}

std::pair<GuidingSystem, HopfNormalization> normalize_at(const GuidingSystem& g_in, const MultiPoly& rho,
                                                         const MultiPoly& w0, const MultiPoly& tau,
                                                         const MultiPoly& omega, const NormalizeOptions& opts) {
  if (omega.is_zero()) throw std::invalid_argument("omega must be nonzero");
  if (rho.is_constant() && rho.constant_term().to_double() <= 0) throw std::invalid_argument("rho must be positive");
  HopfNormalization norm;
  norm.rho = rho;
  norm.w0 = w0;
  norm.tau = tau;
  norm.omega = omega;
  GuidingSystem g = g_in;

  const std::vector<std::string> solve_params = {opts.root_param, opts.constant_param, opts.trace_param, opts.det_param};
  int present = 0;
  for (const auto& p : solve_params) present += mentions(g.g1, p) || mentions(g.g2, p);

  auto apply = [&](const std::string& name, const MultiPoly& value) {
    std::map<std::string, MultiPoly> b{{name, value}};
    g.g1 = bind_vars(g.g1, b);
    g.g2 = bind_vars(g.g2, b);
    for (auto& [k, v] : norm.substitutions) v = bind_vars(v, b);
    norm.substitutions[name] = value;
    norm.solve_order.push_back(name);
  };

  norm.d = at_point(g.g1.derivative("w"), rho, w0);
  if (present == 0) {
    norm.verified_only = true;
  } else if (present != static_cast<int>(solve_params.size())) {
    throw std::invalid_argument("guiding system contains only some of the normalization parameters");
  } else {
    if (opts.d_param) {
      // d = dg1/dw (rho, w0) becomes a free symbol
      MultiPoly d_sym = MultiPoly::variable(opts.d_symbol);
      MultiPoly eq = at_point(g.g1.derivative("w"), rho, w0) - d_sym;
      apply(*opts.d_param, solve_linear(eq, *opts.d_param, "d"));
      norm.d = d_sym;
    }
    if (norm.d.is_zero()) throw DegenerateNormalization("degenerate normalization: d = dg1/dw at (rho, w0) vanishes");
    apply(opts.root_param, solve_linear(at_point(g.g1, rho, w0), opts.root_param, "equilibrium (r')"));
    auto J = jacobian_at(g, rho, w0);
    apply(opts.trace_param, solve_linear(J[0][0] + J[1][1] - MultiPoly::constant(ConstScalar(2)) * tau,
                                         opts.trace_param, "trace"));
    J = jacobian_at(g, rho, w0);
    MultiPoly det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    apply(opts.det_param, solve_linear(det - tau * tau - omega * omega, opts.det_param, "determinant"));
    apply(opts.constant_param, solve_linear(at_point(g.g2, rho, w0), opts.constant_param, "equilibrium (w')"));
    norm.d = at_point(g.g1.derivative("w"), rho, w0);
  }

  if (!at_point(g.g1, rho, w0).is_zero() || !at_point(g.g2, rho, w0).is_zero()) {
    throw std::logic_error("(rho, w0) is not an equilibrium of the guiding system");
  }
  auto J = jacobian_at(g, rho, w0);
  MultiPoly trace = J[0][0] + J[1][1];
  MultiPoly det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  MultiPoly s = tau * tau + omega * omega;
  Rational c = 1;
  if (norm.verified_only) {
    MultiPoly ratio_src;
    if (s.size() == 1) {
      ratio_src = det * s.inverse_monomial();
    } else if (tau.size() == 1 && tau.terms()[0].second == ConstScalar(1) && tau.used_vars().size() == 1) {
      std::map<std::string, MultiPoly> zero{{tau.used_vars()[0], MultiPoly()}};
      MultiPoly om2 = omega * omega;
      if (om2.size() != 1) throw std::invalid_argument("omega must be a monomial");
      ratio_src = bind_vars(det, zero) * om2.inverse_monomial();
    } else {
      throw std::invalid_argument("cannot identify the time scale of the guiding system");
    }
    if (!ratio_src.is_constant() || !ratio_src.constant_term().is_rational()) {
      throw std::logic_error("Jacobian at (rho, w0) does not have eigenvalues proportional to tau +- i omega");
    }
    auto root = rational_sqrt(ratio_src.constant_term().to_rational());
    if (!root || *root <= 0) throw std::logic_error("time scale of the guiding system is not a rational square");
    c = *root;
    if (c != 1) {
      ConstScalar inv(1 / c);
      g.g1 = g.g1 * inv;
      g.g2 = g.g2 * inv;
      g.scale = g.scale * inv;
      trace = trace * inv;
      det = det * ConstScalar(1 / (c * c));
    }
  }
  if (trace != MultiPoly::constant(ConstScalar(2)) * tau || det != s) {
    throw std::logic_error("Jacobian at (rho, w0) does not have eigenvalues tau +- i omega");
  }
  norm.time_scale = c;
  return {g, norm};
}

json HopfNormalization::to_json() const {
  json subs = json::object();
  for (const auto& name : solve_order) subs[name] = substitutions.at(name).to_string();
  return {{"rho", poly_string(rho)},
          {"w0", poly_string(w0)},
          {"tau", poly_string(tau)},
          {"omega", poly_string(omega)},
          {"d", poly_string(d)},
          {"substitutions", subs},
          {"solve_order", solve_order},
          {"time_scale", to_string(time_scale)},
          {"verified_only", verified_only}};
}

PlanarJordanSystem jordan_form(const GuidingSystem& g, const HopfNormalization& norm,
                               const std::optional<std::array<std::array<MultiPoly, 2>, 2>>& basis) {
  if (norm.omega.is_constant()) {
    Interval om = norm.omega.constant_term().enclosure(128);
    if (om.contains_zero()) throw std::invalid_argument("eigenvalues are not complex: omega encloses 0");
  }
  auto J = jacobian_at(g, norm.rho, norm.w0);
  std::array<std::array<MultiPoly, 2>, 2> P;
  if (basis) {
    P = *basis;
  } else {
    const MultiPoly& a = J[0][0];
    const MultiPoly& b = J[0][1];
    if (b.size() != 1) {
      throw std::invalid_argument("default Jordan basis needs a monomial dg1/dw; supply an explicit basis");
    }
    MultiPoly binv = b.inverse_monomial();
    P[0][0] = MultiPoly::constant(ConstScalar(1));
    P[0][1] = MultiPoly();
    P[1][0] = (norm.tau - a) * binv;
    P[1][1] = -(norm.omega * binv);
  }
  // J P must equal P * [[tau, -omega], [omega, tau]]
  for (int i = 0; i < 2; ++i) {
    MultiPoly jp0 = J[i][0] * P[0][0] + J[i][1] * P[1][0];
    MultiPoly jp1 = J[i][0] * P[0][1] + J[i][1] * P[1][1];
    MultiPoly pb0 = P[i][0] * norm.tau + P[i][1] * norm.omega;
    MultiPoly pb1 = -(P[i][0] * norm.omega) + P[i][1] * norm.tau;
    if (jp0 != pb0 || jp1 != pb1) throw std::invalid_argument("basis does not conjugate the linear part to Jordan form");
  }
  MultiPoly detP = P[0][0] * P[1][1] - P[0][1] * P[1][0];
  if (detP.size() != 1) throw std::invalid_argument("basis determinant is not an invertible monomial");
  MultiPoly dinv = detP.inverse_monomial();
  VarList xy = make_vars({"x", "y"});
  MultiPoly x = MultiPoly::variable(xy, "x");
  MultiPoly y = MultiPoly::variable(xy, "y");
  std::map<std::string, MultiPoly> change{{"r", norm.rho + P[0][0] * x + P[0][1] * y},
                                          {"w", norm.w0 + P[1][0] * x + P[1][1] * y}};
  MultiPoly G1 = bind_vars(g.g1, change);
  MultiPoly G2 = bind_vars(g.g2, change);
  PlanarJordanSystem out;
  out.xdot = state_first((P[1][1] * G1 - P[0][1] * G2) * dinv);
  out.ydot = state_first((P[0][0] * G2 - P[1][0] * G1) * dinv);
  out.tau = norm.tau;
  out.omega = norm.omega;
  out.shift = {norm.rho, norm.w0};
  out.basis = P;
  out.check_linear_part();
  return out;
}

void PlanarJordanSystem::check_linear_part() const {
  auto part = [](const MultiPoly& p, int i, int j) { return coefficient_of(p, {{"x", i}, {"y", j}}); };
  bool ok = part(xdot, 0, 0).is_zero() && part(ydot, 0, 0).is_zero() && part(xdot, 1, 0) == tau &&
            part(xdot, 0, 1) == -omega && part(ydot, 1, 0) == omega && part(ydot, 0, 1) == tau;
  for (const MultiPoly* p : {&xdot, &ydot}) {
    int ix = p->var_index("x");
    int iy = p->var_index("y");
    for (const auto& [e, c] : p->terms()) {
      if ((ix >= 0 && e[ix] < 0) || (iy >= 0 && e[iy] < 0)) ok = false;
    }
  }
  if (!ok) throw std::logic_error("linear part is not the real Jordan block");
}

std::vector<std::string> PlanarJordanSystem::params() const {
  std::vector<std::string> out;
  for (const MultiPoly* p : {&xdot, &ydot, &tau, &omega}) {
    for (const auto& v : p->used_vars()) {
      if (v != "x" && v != "y" && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

PlanarJordanSystem PlanarJordanSystem::at_tau_zero() const {
  PlanarJordanSystem out = *this;
  if (tau.is_zero()) return out;
  auto names = tau.used_vars();
  if (names.size() != 1 || tau != MultiPoly::variable(names[0])) {
    throw std::invalid_argument("tau is not a free symbol");
  }
  std::map<std::string, MultiPoly> zero{{names[0], MultiPoly()}};
  out.xdot = bind_vars(xdot, zero);
  out.ydot = bind_vars(ydot, zero);
  for (auto& s : out.shift) s = bind_vars(s, zero);
  for (auto& row : out.basis) {
    for (auto& e : row) e = bind_vars(e, zero);
  }
  out.tau = MultiPoly();
  return out;
}

json PlanarJordanSystem::to_json() const {
  json basis_json = json::array();
  for (const auto& row : basis) basis_json.push_back({row[0].to_string(), row[1].to_string()});
  return {{"x", xdot.to_string()},
          {"y", ydot.to_string()},
          {"tau", tau.to_string()},
          {"omega", omega.to_string()},
          {"shift", {shift[0].to_string(), shift[1].to_string()}},
          {"basis", basis_json},
          {"canonical", {{"x", nhtori::to_json(xdot)}, {"y", nhtori::to_json(ydot)}}}};
}

PlanarJordanSystem PlanarJordanSystem::from_json(const json& j) {
  PlanarJordanSystem s;
  s.xdot = state_first(poly_from_any(j.at("x")));
  s.ydot = state_first(poly_from_any(j.at("y")));
  s.tau = j.contains("tau") ? poly_from_any(j.at("tau")) : MultiPoly();
  s.omega = j.contains("omega") ? poly_from_any(j.at("omega")) : MultiPoly::constant(ConstScalar(1));
  if (j.contains("shift")) {
    for (int i = 0; i < 2; ++i) s.shift[i] = poly_from_any(j.at("shift").at(i));
  }
  if (j.contains("basis")) {
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) s.basis[i][k] = poly_from_any(j.at("basis").at(i).at(k));
    }
  } else {
    s.basis[0][0] = s.basis[1][1] = MultiPoly::constant(ConstScalar(1));
  }
  s.check_linear_part();
  return s;
}

}  // namespace nhtori
