#include "nhtori/scenarios.hpp"

#include "nhtori/averaging.hpp"
#include "nhtori/bounds.hpp"
#include "nhtori/certify.hpp"
#include "nhtori/dynamics.hpp"
#include "nhtori/fixtures.hpp"
#include "nhtori/hopfprep.hpp"
#include "nhtori/ideal.hpp"
#include "nhtori/lyapunov.hpp"
#include "nhtori/poly_eval.hpp"
#include "nhtori/poly_parse.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace nhtori {

using json = nlohmann::json;

namespace {

MultiPoly P(const std::string& s) { return parse_poly(s); }
RatPoly R(const std::string& s) { return parse_rat_poly(s); }
Rational Q(const json& j) { return parse_rational(j.get<std::string>()); }

const json& lyapunov_golden() {
  static const json g = load_fixture("lyapunov_golden");
  return g;
}

RatPoly golden(const std::string& sys, const std::string& key) {
  return R(lyapunov_golden().at(sys).at(key).get<std::string>());
}

std::string str(const Rational& q) { return to_string(q); }

bool same(const MultiPoly& a, const MultiPoly& b) { return (a - b).is_zero(); }

/// Runs one pipeline step; an exception is recorded as a failed check and
/// stops the scenario.
bool step(ScenarioReport& rep, const std::string& name, const std::function<void()>& body) {
  try {
    body();
    return true;
  } catch (const std::exception& e) {
    rep.add(name, false, std::string("error: ") + e.what());
    rep.aborted = name;
    return false;
  }
}

/// f(g) at (rho, w0), tau and the reference Jordan system at tau = 0.
void jordan_stage(ScenarioReport& rep, const json& fx, const GuidingSystem& g, PlanarJordanSystem* out = nullptr) {
  auto [gn, norm] = normalize_at(g, P("1"), P("0"), P(fx.value("tau", "tau")), P("1"));
  const Rational scale = Q(fx.at("time_scale"));
  rep.add("normalize: Hopf point (1, 0) verified", norm.verified_only, "time scale " + str(norm.time_scale));
  rep.add("normalize: time scale", norm.time_scale == scale, "expected " + str(scale) + ", got " + str(norm.time_scale));
  std::optional<std::array<std::array<MultiPoly, 2>, 2>> basis;
  if (fx.contains("jordan_basis")) {
    const auto& b = fx.at("jordan_basis");
    basis = std::array<std::array<MultiPoly, 2>, 2>{
        {{P(b[0][0].get<std::string>()), P(b[0][1].get<std::string>())},
         {P(b[1][0].get<std::string>()), P(b[1][1].get<std::string>())}}};
  }
  auto J = jordan_form(gn, norm, basis).at_tau_zero();
  auto ref = PlanarJordanSystem::from_json(load_fixture(fx.at("jordan").get<std::string>()));
  rep.add("jordan: matches " + fx.at("jordan").get<std::string>(), same(J.xdot, ref.xdot) && same(J.ydot, ref.ydot),
          "x' = " + J.xdot.to_string() + ", y' = " + J.ydot.to_string());
  if (out) *out = J;
}

void check_golden(ScenarioReport& rep, const std::string& sys, const std::string& key, const RatPoly& got) {
  const RatPoly want = golden(sys, key);
  rep.add("lyapunov: " + key + " golden", got == want, got == want ? "exact" : "got " + got.to_string());
}

// ---------------------------------------------------------------------------

void run_generic_quadratic(const json& fx, const ScenarioOptions&, ScenarioReport& rep) {
  GuidingSystem g;
  const int m = fx.at("family").at("m"), n = fx.at("family").at("n");
  if (!step(rep, "derive", [&] {
        g = first_averaged(to_standard_form(generic_family(m, n), 1));
        const auto& G = fx.at("guiding");
        rep.add("derive: g1", same(g.g1, P(G.at("g1"))), g.g1.to_string());
        rep.add("derive: g2", same(g.g2, P(G.at("g2"))), g.g2.to_string());
      }))
    return;
  NormalizeOptions opts;
  opts.d_param = fx.at("d_param").get<std::string>();
  if (!step(rep, "normalize", [&] {
        auto [gn, norm] = normalize_at(g, P("rho"), P("w0"), P("tau"), P("omega"), opts);
        rep.add("normalize: solve order", norm.solve_order == fx.at("solve_order").get<std::vector<std::string>>(),
                json(norm.solve_order).dump());
        rep.add("normalize: d symbol", same(norm.d, P("d")), norm.d.to_string());
        const auto& N = fx.at("normalized");
        rep.add("normalize: g1", same(gn.g1, P(N.at("g1"))), gn.g1.to_string());
        rep.add("normalize: g2", same(gn.g2, P(N.at("g2"))), gn.g2.to_string());
        auto Jac = jacobian_at(gn, P("rho"), P("w0"));
        rep.add("normalize: trace 2 tau", same(Jac[0][0] + Jac[1][1], P("2*tau")));
        rep.add("normalize: determinant tau^2 + omega^2",
                same(Jac[0][0] * Jac[1][1] - Jac[0][1] * Jac[1][0], P("tau^2 + omega^2")));
        rep.artifacts["normalization"] = norm.to_json();
      }))
    return;
  step(rep, "jordan", [&] {
    auto [gn, norm] = normalize_at(g, P("rho"), P("w0"), P("0"), P("1"), opts);
    const auto& b = fx.at("jordan_basis");
    std::array<std::array<MultiPoly, 2>, 2> B{{{P(b[0][0].get<std::string>()), P(b[0][1].get<std::string>())},
                                               {P(b[1][0].get<std::string>()), P(b[1][1].get<std::string>())}}};
    auto J = jordan_form(gn, norm, B);
    const auto& Jf = fx.at("jordan");
    rep.add("jordan: x'", same(J.xdot, P(Jf.at("x"))), J.xdot.to_string());
    rep.add("jordan: y'", same(J.ydot, P(Jf.at("y"))), J.ydot.to_string());
    rep.add("jordan: time rescaling is positive", norm.time_scale > 0, str(norm.time_scale));
    auto w = is_time_reversible(J);
    rep.add("jordan: reversible (center for all parameters)",
            w.reversible && w.axis == fx.at("reversible_axis").get<std::string>(), "axis " + w.axis);
    rep.artifacts["jordan"] = J.to_json();
  });
}

void run_nilcubic(const json& fx, const ScenarioOptions& opts, ScenarioReport& rep) {
  GuidingSystem g;
  if (!step(rep, "derive", [&] {
        auto spec = Field3DSpec::from_json(load_fixture(fx.at("field")));
        g = first_averaged(to_standard_form(spec, 1));
        Rational factor;
        bool ok = equal_up_to_positive_scale(GuidingSystem::from_json(load_fixture(fx.at("guiding"))), g, &factor);
        rep.add("derive: guiding system up to a positive scale", ok && factor == Q(fx.at("guiding_scale")),
                "scale " + str(factor));
      }))
    return;
  if (!step(rep, "jordan", [&] { jordan_stage(rep, fx, g); })) return;

  const std::string jname = fx.at("jordan");
  FocusQuantitySequence L;
  if (!step(rep, "lyapunov", [&] {
        L = lyapunov_coefficients(PlanarJordanSystem::from_json(load_fixture(jname)), fx.at("count"));
        rep.add("lyapunov: unit", L.unit == 1, str(L.unit));
        for (const auto& key : fx.at("golden")) check_golden(rep, jname, key, L.L[std::stoi(key.get<std::string>().substr(1)) - 1]);
      }))
    return;

  std::vector<std::string> vars;
  std::vector<Rational> mu;
  std::map<std::string, double> mu_d;
  for (auto& [k, v] : fx.at("mu_hat").items()) {
    vars.push_back(k);
    mu.push_back(Q(v));
    mu_d[k] = to_double(mu.back());
  }
  const std::size_t k = vars.size();
  if (!step(rep, "certify", [&] {
        std::vector<RatPoly> fs(L.L.begin(), L.L.begin() + k);
        CertifyOptions co;
        co.extra = {L.L[k]};
        auto c = certify_simple_zero(fs, vars, mu, Q(fx.at("radius")), co);
        rep.add("certify: verdict", c.certified(), c.verdict);
        const Rational lo = Q(fx.at("face_bounds")[0]), hi = Q(fx.at("face_bounds")[1]);
        bool faces_ok = c.pm.faces.size() == 2 * k;
        json faces = json::array();
        for (const auto& f : c.pm.faces) {
          const Interval& v = f.value;
          bool in = v.strictly_positive() ? (v.lower() >= lo && v.upper() <= hi)
                                          : (v.upper() <= -lo && v.lower() >= -hi);
          faces_ok = faces_ok && in;
          faces.push_back(to_sci_string(v, 8));
        }
        rep.add("certify: face enclosures within [" + to_sci_string(lo, 3) + ", " + to_sci_string(hi, 3) + "]", faces_ok,
                faces.dump());
        const Interval& l5 = c.extra.at(0);
        rep.add("certify: next focus quantity excludes 0 (normalized)", !l5.contains_zero(), to_sci_string(l5, 8));
        const Rational gmax = Q(fx.at("gerschgorin_center_max"));
        rep.add("certify: Gerschgorin off-diagonal bound at the center",
                c.gerschgorin_center.nonsingular() && c.gerschgorin_center.max_radius() <= gmax,
                to_sci_string(c.gerschgorin_center.max_radius(), 6));
        rep.add("certify: Gerschgorin over the whole box", c.gerschgorin.nonsingular(),
                "max off-diagonal sum " + to_sci_string(c.gerschgorin.max_radius(), 6));
        auto replay = pm_check(c.system.g, c.system.map.uvars, c.pm.box, opts.precision);
        bool same_signs = replay.certified() && replay.faces.size() == c.pm.faces.size();
        for (std::size_t f = 0; same_signs && f < replay.faces.size(); ++f)
          same_signs = replay.faces[f].value.strictly_positive() == c.pm.faces[f].value.strictly_positive();
        rep.add("certify: replay at " + std::to_string(opts.precision) + " bits", same_signs, replay.verdict);
        rep.artifacts["faces"] = faces;
        rep.artifacts["next_focus_quantity"] = to_sci_string(l5, 8);
      }))
    return;

  step(rep, "unfold", [&] {
    UnfoldOptions uo;
    uo.zero_tolerance = fx.at("unfold_zero_tolerance");
    auto steps = unfold_schedule(L.L, mu_d, static_cast<int>(k) + 1, uo);
    const int want = fx.at("predicted_tori");
    rep.add("unfold: nested schedule", !steps.empty() && steps.back().expected_cycles == want,
            steps.empty() ? "empty" : steps.back().pattern);
    json s = json::array();
    for (const auto& st : steps) s.push_back(st.pattern);
    rep.artifacts["unfold"] = s;
    rep.notes.push_back(std::to_string(want) + " limit cycles of the guiding system, hence " + std::to_string(want) +
                        " limit tori for small eps");
  });
}

void run_nilquartic(const json& fx, const ScenarioOptions& opts, ScenarioReport& rep) {
  GuidingSystem g;
  if (!step(rep, "derive", [&] {
        auto spec = Field3DSpec::from_json(load_fixture(fx.at("field")));
        g = first_averaged(to_standard_form(spec, 1));
        Rational factor;
        bool ok = equal_up_to_positive_scale(GuidingSystem::from_json(load_fixture(fx.at("guiding"))), g, &factor);
        rep.add("derive: guiding system up to a positive scale", ok && factor == Q(fx.at("guiding_scale")),
                "scale " + str(factor));
      }))
    return;
  if (!step(rep, "jordan", [&] { jordan_stage(rep, fx, g); })) return;

  const std::string s = fx.at("jordan");
  const json& gold = lyapunov_golden().at(s);
  FocusQuantitySequence L;
  if (!step(rep, "lyapunov", [&] {
        TruncationPolicy pol;
        pol.max_degree = fx.at("truncation");
        L = lyapunov_coefficients(PlanarJordanSystem::from_json(load_fixture(s)), fx.at("count"), pol);
        for (int i = 0; i < 3; ++i) {
          const std::string key = fx.at("linear_golden")[i];
          RatPoly lin = homogeneous_part(L.L[i], {}, 1);
          rep.add("lyapunov: " + key + " golden", lin == golden(s, key), lin.to_string());
        }
      }))
    return;
  std::vector<RatPoly> quad;
  if (!step(rep, "eliminate", [&] {
        auto unknowns = gold.at("solve_for").get<std::vector<std::string>>();
        auto sol = solve_leading({L.L[0], L.L[1], L.L[2]}, unknowns, 2);
        bool zero = true;
        for (int i = 0; i < 3; ++i) zero = zero && substitute_truncated(L.L[i], sol, 2).is_zero();
        rep.add("eliminate: L1 = L2 = L3 = 0 solved through degree 2", zero, json(unknowns).dump());
        bool no_linear = true;
        for (int i = 3; i < static_cast<int>(L.L.size()); ++i) {
          RatPoly reduced = substitute_truncated(L.L[i], sol, 2);
          no_linear = no_linear && homogeneous_part(reduced, {}, 1).is_zero();
          quad.push_back(homogeneous_part(reduced, {}, 2));
        }
        rep.add("eliminate: later linear parts vanish", no_linear);
        for (int i = 0; i < 3; ++i) {
          const std::string key = fx.at("quadratic_golden")[i];
          rep.add("eliminate: " + key + " golden", quad[i] == golden(s, key), quad[i] == golden(s, key) ? "exact" : quad[i].to_string());
        }
      }))
    return;
  step(rep, "alpha", [&] {
    std::map<std::string, RatPoly> subs;
    for (auto& [k, v] : gold.at("substitutions").items()) subs[k] = R(v.get<std::string>());
    const auto& q = gold.at("alpha_quadratic");
    Rational A(Q(q[0])), B(Q(q[1])), C(Q(q[2]));
    RatPoly minpoly = R(q[0].get<std::string>() + "*alpha^2 + " + q[1].get<std::string>() + "*alpha + " +
                        q[2].get<std::string>());
    const unsigned bits = std::max(opts.precision, 256u);
    auto roots = quadratic_roots(A, B, C, bits);
    OrderSpec lex{MonomialOrder::kLex, {"alpha"}};
    const Rational tiny = Q(fx.at("enclosure_width"));
    Rational widest = 0;
    bool l7_ok = true;
    for (int i = 0; i < 4; ++i) {
      RatPoly at = quad[i].substitute(subs);
      if (i < 3)
        rep.add("alpha: L" + std::to_string(i + 4) + " quadratic part vanishes modulo the minimal polynomial",
                reduce_mod_ideal(at, {minpoly}, lex).remainder.is_zero());
      bool encl_ok = true;
      for (const auto& root : roots) {
        std::map<RatPoly::Exponent, std::vector<RatPoly::Term>> by_monomial;
        const int ia = at.var_index("alpha");
        for (const auto& [e, c] : at.terms()) {
          RatPoly::Exponent rest = e, ae(e.size(), 0);
          if (ia >= 0) {
            rest[ia] = 0;
            ae[ia] = e[ia];
          }
          by_monomial[rest].emplace_back(ae, c);
        }
        for (auto& [mono, terms] : by_monomial) {
          Interval enc = interval_eval(RatPoly(at.vars(), terms), {{"alpha", root}}, bits);
          if (i < 3) {
            encl_ok = encl_ok && enc.contains_zero() && enc.width() < tiny;
            if (enc.width() > widest) widest = enc.width();
            continue;
          }
          RatPoly::Exponent target(at.nvars(), 0);
          target[at.var_index("lambda15")] = 1;
          target[at.var_index("lambda9")] = 1;
          if (mono == target) {
            Interval expect = Interval(Q(gold.at("L7_coefficient"))) * root;
            l7_ok = l7_ok && abs(enc - expect).upper() < tiny;
          } else {
            l7_ok = l7_ok && enc.contains_zero();
          }
        }
      }
      if (i < 3)
        rep.add("alpha: L" + std::to_string(i + 4) + " enclosures contain 0 with width < " + to_sci_string(tiny, 2),
                encl_ok);
    }
    rep.add("alpha: L7 reduces to the reference ratio times lambda15 lambda9 alpha", l7_ok);
    rep.artifacts["widest_enclosure"] = to_sci_string(widest, 3);
    rep.artifacts["alpha_roots"] = json::array({to_sci_string(roots[0], 12), to_sci_string(roots[1], 12)});
    rep.notes.push_back("3 linear + 4 quadratic independent focus quantities: " +
                        std::to_string(fx.at("predicted_tori").get<int>()) + " limit tori");
  });
}

void run_nilquintic(const json& fx, const ScenarioOptions&, ScenarioReport& rep) {
  GuidingSystem g;
  if (!step(rep, "derive", [&] {
        auto spec = Field3DSpec::from_json(load_fixture(fx.at("field")));
        g = first_averaged(to_standard_form(spec, 1));
        rep.add("derive: guiding system", !g.g1.is_zero() && !g.g2.is_zero());
      }))
    return;
  if (!step(rep, "jordan", [&] { jordan_stage(rep, fx, g); })) return;
  const std::string s = fx.at("jordan");
  step(rep, "lyapunov", [&] {
    TruncationPolicy pol;
    pol.max_degree = fx.at("truncation");
    auto sys = PlanarJordanSystem::from_json(load_fixture(s));
    auto L = lyapunov_coefficients(sys, fx.at("count"), pol);
    for (int i = 0; i < 3; ++i) {
      const std::string key = fx.at("linear_golden")[i];
      RatPoly lin = homogeneous_part(L.L[i], {}, 1);
      rep.add("lyapunov: " + key + " golden", lin == golden(s, key), lin.to_string());
    }
    bool no_const = true;
    for (const auto& l : L.L) no_const = no_const && l.constant_term() == 0;
    rep.add("lyapunov: focus quantities vanish at mu = 0", no_const);
    auto params = lyapunov_golden().at(s).at("params").get<std::vector<std::string>>();
    std::map<std::string, Rational> zero;
    for (const auto& p : params) zero[p] = 0;
    const int rank = rank_at(L.L, zero, params);
    rep.add("lyapunov: rank of the linear parts at mu = 0", rank == fx.at("rank").get<int>(), std::to_string(rank));
    rep.add("lyapunov: the system is not time-reversible", !is_time_reversible(sys.at_tau_zero()).reversible);
    rep.notes.push_back("linear stage: " + std::to_string(fx.at("verified_tori").get<int>()) +
                        " limit tori verified; the quadratic stage giving " +
                        std::to_string(fx.at("predicted_tori").get<int>()) +
                        " needs L9..L13 beyond the linear truncation and is not reproduced");
  });
}

void run_quadratic_hopfzero(const json& fx, const ScenarioOptions& opts, ScenarioReport& rep) {
  GuidingSystem g2;
  if (!step(rep, "derive", [&] {
        auto spec = Field3DSpec::from_json(load_fixture(fx.at("field")));
        auto sf = to_standard_form(spec, 2);
        auto g1 = first_averaged(sf);
        rep.add("derive: first averaged function vanishes", g1.g1.is_zero() && g1.g2.is_zero());
        g2 = second_melnikov(sf);
        Rational factor;
        GuidingSystem reference = GuidingSystem::from_json(load_fixture(fx.at("g2")));
        bool ok = equal_up_to_positive_scale(reference, g2, &factor);
        rep.add("derive: second averaged function up to a positive scale", ok && factor == Q(fx.at("g2_scale")),
                "scale " + str(factor));
        rep.add("derive: reference r component", same(reference.g1, P(fx.at("g2_r"))), reference.g1.to_string());
        rep.artifacts["g2"] = g2.to_json();
      }))
    return;
  if (!step(rep, "jordan", [&] {
        GuidingSystem g = g2;
        std::map<std::string, MultiPoly> tau0{{"tau", MultiPoly()}};
        g.g1 = g.g1.substitute(tau0);
        g.g2 = g.g2.substitute(tau0);
        jordan_stage(rep, fx, g);
      }))
    return;

  const std::string s = fx.at("jordan");
  auto J = PlanarJordanSystem::from_json(load_fixture(s));
  FocusQuantitySequence L;
  std::map<std::string, Rational> pt;
  for (auto& [k, v] : fx.at("point").items()) pt[k] = Q(v);
  if (!step(rep, "lyapunov", [&] {
        L = lyapunov_coefficients(J, fx.at("count"));
        check_golden(rep, s, "L1", L.L[0]);
        OrderSpec lex{MonomialOrder::kLex, {fx.at("reduce_first").get<std::string>()}};
        RatPoly r2 = reduce_mod_ideal(L.L[1], {L.L[0]}, lex).remainder;
        RatPoly r3 = reduce_mod_ideal(L.L[2], {L.L[0]}, lex).remainder;
        rep.add("lyapunov: L2 mod L1 golden", r2 == golden(s, "L2_mod_L1"), r2.to_string());
        rep.add("lyapunov: L3 mod L1 golden", r3 == golden(s, "L3_mod_L1"), r3.to_string());
        Rational l1 = L.L[0].evaluate(pt), l2 = L.L[1].evaluate(pt), l3 = L.L[2].evaluate(pt);
        rep.add("lyapunov: L1 = L2 = 0 at the point", l1 == 0 && l2 == 0, str(l1) + ", " + str(l2));
        rep.add("lyapunov: L3 at the point", l3 == Q(fx.at("L3_value")), str(l3));
        std::vector<std::string> pv;
        for (const auto& [k, v] : pt) pv.push_back(k);
        const int rank = rank_at(std::vector<RatPoly>{L.L[0], L.L[1]}, pt, pv);
        rep.add("lyapunov: L1, L2 independent at the point", rank == 2, "rank " + std::to_string(rank));
        RatPoly gcd = univariate_gcd(r2, r3, "alpha");
        bool member = true;
        for (std::size_t i = 3; i < L.L.size(); ++i)
          member = member && reduce_mod_ideal(L.L[i], {L.L[0], gcd}, lex).remainder.is_zero();
        rep.add("lyapunov: L4, L5 in <L1, L2, L3>", member,
                "basis <L1, gcd(L2 mod L1, L3 mod L1)>; gcd = " + gcd.to_string());
      }))
    return;
  std::vector<UnfoldStep> steps;
  if (!step(rep, "unfold", [&] {
        UnfoldOptions uo;
        uo.ratio = fx.at("unfold_ratio");
        steps = unfold_schedule(L.L, pt, 3, uo);
        const int want = fx.at("predicted_tori");
        rep.add("unfold: nested schedule", steps.size() == 3 && steps.back().expected_cycles == want,
                steps.empty() ? "empty" : steps.back().pattern);
        json js = json::array();
        for (const auto& st : steps) js.push_back(st.pattern);
        rep.artifacts["unfold"] = js;
      }))
    return;
  if (!opts.simulate) {
    rep.notes.push_back("numerical stage skipped");
    return;
  }
  step(rep, "simulate", [&] {
    ODESystem sys = ODESystem::from_jordan(J, steps[0].params, steps[0].tau);
    const double l2 = eval_double(L.L[1], steps[0].params), l3 = eval_double(L.L[2], steps[0].params);
    const double rho = std::sqrt(-(5.0 / 16) * l2 / ((35.0 / 128) * l3));
    auto lc = find_limit_cycle(sys, {rho, 0}, 2 * M_PI);
    rep.add("simulate: first unfolding step has a hyperbolic cycle", lc.found(),
            lc.status + ", multiplier " + fixed(lc.multiplier, 8));
    rep.add("simulate: the cycle repels (L2 < 0 inside, L3 > 0 outside)", lc.found() && !lc.stable);
    rep.add("simulate: Liouville check", std::abs(lc.monodromy_det - lc.liouville) < 1e-6,
            sci(std::abs(lc.monodromy_det - lc.liouville), 3));
    rep.artifacts["cycle"] = {{"amplitude", fixed(std::hypot(lc.point[0], lc.point[1]), 6)},
                              {"period", fixed(lc.period, 6)},
                              {"multiplier", fixed(lc.multiplier, 8)}};
  });
}

void run_cubic_hopfzero(const json& fx, const ScenarioOptions& opts, ScenarioReport& rep) {
  const std::string s = fx.at("jordan");
  if (!step(rep, "lyapunov", [&] {
        auto L = lyapunov_coefficients(PlanarJordanSystem::from_json(load_fixture(s)), fx.at("count"));
        check_golden(rep, s, "L1", L.L[0]);
        OrderSpec lex{MonomialOrder::kLex, {"lambda5"}};
        RatPoly r2 = reduce_mod_ideal(L.L[1], {L.L[0]}, lex).remainder;
        Rational unit;
        bool ok = equal_up_to_unit(r2, golden(s, "L2_mod_L1"), &unit) && unit != 0;
        rep.add("lyapunov: L2 mod L1 equals the reference form up to a unit", ok, "unit " + str(unit));
        OrderSpec lex2{MonomialOrder::kLex, {"lambda5", "lambda3"}};
        std::vector<RatPoly> ideal{L.L[0], golden(s, "factor")};
        RatPoly r3 = reduce_mod_ideal(L.L[2], ideal, lex2).remainder;
        RatPoly p3 = reduce_mod_ideal(golden(s, "L3_mod_L1_and_factor"), ideal, lex2).remainder;
        rep.add("lyapunov: L3 mod <L1, factor> equals the reference form up to a unit", equal_up_to_unit(r3, p3, &unit),
                "unit " + str(unit));
      }))
    return;

  auto spec = Field3DSpec::from_json(load_fixture(fx.at("field")));
  std::map<std::string, double> params = fx.at("params").get<std::map<std::string, double>>();
  GuidingSystem g;
  if (!step(rep, "derive", [&] {
        g = first_averaged(to_standard_form(spec, 1));
        const auto eq = fx.at("equilibrium").get<std::vector<double>>();
        ODESystem G = ODESystem::from_guiding(g, params);
        auto v = G.eval(eq);
        rep.add("derive: guiding equilibrium", std::hypot(v[0], v[1]) < 1e-12, sci(std::hypot(v[0], v[1]), 3));
      }))
    return;
  if (!opts.simulate) {
    rep.notes.push_back("numerical stages skipped");
    return;
  }
  if (!step(rep, "cycles", [&] {
        ODESystem G = ODESystem::from_guiding(g, params);
        const auto eq = fx.at("equilibrium").get<std::vector<double>>();
        LimitCycleOptions lo;
        lo.margin = fx.at("cycle_margin");
        int found = 0;
        json cyc = json::array();
        std::vector<bool> stability;
        for (double s0 : fx.at("cycle_seeds").get<std::vector<double>>()) {
          auto lc = find_limit_cycle(G, {eq[0] + s0, eq[1]}, fx.at("cycle_period"), lo);
          if (lc.found()) {
            ++found;
            stability.push_back(lc.stable);
          }
          cyc.push_back({{"status", lc.status},
                         {"amplitude", fixed(lc.point.empty() ? 0.0 : std::hypot(lc.point[0] - eq[0], lc.point[1] - eq[1]), 6)},
                         {"multiplier", fixed(lc.multiplier, 8)},
                         {"liouville_error", sci(std::abs(lc.monodromy_det - lc.liouville), 2)}});
        }
        const int target = fx.at("target");
        rep.add("cycles: guiding limit cycles", found == target, std::to_string(found) + " found");
        rep.add("cycles: stability alternates",
                found == 3 && !stability[0] && stability[1] && !stability[2], "repelling, attracting, repelling");
        rep.artifacts["cycles"] = cyc;
      }))
    return;
  if (!opts.sweep) {
    rep.notes.push_back("eps-sweep skipped");
    return;
  }
  step(rep, "tori", [&] {
    TorusOptions to;
    const auto eq = fx.at("equilibrium").get<std::vector<double>>();
    to.center = {eq[0], eq[1]};
    const auto sc = fx.at("scan").get<std::vector<double>>();
    for (int i = 0; sc[0] + i * sc[2] <= sc[1] + 1e-12; ++i) to.scan.push_back(sc[0] + i * sc[2]);
    const auto sw = fx.at("sweep");
    const int target = fx.at("target");
    auto res = eps_sweep(spec, params, log_sweep(sw[0], sw[1], sw[2]), to, target, opts.threads);
    json runs = json::array();
    for (const auto& r : res.runs) {
      json circles = json::array();
      for (const auto& c : r.circles)
        circles.push_back({{"s", fixed(c.s, 4)}, {"attracting", c.attracting}, {"source", c.source}});
      runs.push_back({{"eps", sci(r.eps, 2)}, {"count", r.count}, {"circles", circles}});
    }
    rep.artifacts["sweep"] = runs;
    std::string hits;
    for (double h : res.hits) hits += (hits.empty() ? "" : ", ") + sci(h, 2);
    rep.add("tori: at least one invariant circle for some eps", res.best_count >= 1,
            "best count " + std::to_string(res.best_count));
    rep.add("tori: " + std::to_string(target) + " invariant circles", !res.hits.empty(),
            res.hits.empty() ? "not observed" : "observed at eps = " + hits, true);
  });
}

void run_bounds_table(const json& fx, const ScenarioOptions&, ScenarioReport& rep) {
  auto seeds_of = [](const json& j) {
    std::map<int, std::int64_t> s;
    for (auto& [k, v] : j.items()) s[std::stoi(k)] = v.get<std::int64_t>();
    return s;
  };
  step(rep, "bounds", [&] {
    const int m_max = fx.at("m_max");
    auto t = bound_table(seeds_of(fx.at("seeds")), m_max);
    auto expected = fx.at("expected").get<std::vector<std::int64_t>>();
    std::vector<std::int64_t> got;
    for (int m = 2; m <= m_max; ++m) got.push_back(t.entries.count(m) ? t.entries.at(m).tau : -1);
    rep.add("bounds: new row", got == expected, json(got).dump());
    rep.add("bounds: strictly increasing",
            std::adjacent_find(got.begin(), got.end(), [](auto a, auto b) { return b < a + 1; }) == got.end());
    auto again = bound_table(t.values(), m_max);
    rep.add("bounds: fixed point", again.values() == t.values());
    auto old = bound_table(seeds_of(fx.at("old_seeds")), m_max);
    auto old_row = fx.at("old_row").get<std::vector<std::int64_t>>();
    bool dom = true;
    for (int m : fx.at("old_dominated").get<std::vector<int>>()) dom = dom && old.entries.at(m).tau >= old_row[m - 2];
    rep.add("bounds: small seeds dominate the old row where lifts apply", dom);
    rep.artifacts["table"] = t.to_json();
  });
}

using Runner = void (*)(const json&, const ScenarioOptions&, ScenarioReport&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r{{"generic-quadratic", run_generic_quadratic},
                                               {"nilcubic", run_nilcubic},
                                               {"nilquartic", run_nilquartic},
                                               {"nilquintic", run_nilquintic},
                                               {"quadratic-hopfzero", run_quadratic_hopfzero},
                                               {"cubic-hopfzero", run_cubic_hopfzero},
                                               {"bounds-table", run_bounds_table}};
  return r;
}

}  // namespace

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string sci(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

bool ScenarioReport::pass() const {
  if (!aborted.empty() || checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass && !c.soft) return false;
  return true;
}

void ScenarioReport::add(const std::string& n, bool p, const std::string& d, bool soft) {
  checks.push_back({n, p, d, soft});
}

const Check* ScenarioReport::find(const std::string& n) const {
  for (const auto& c : checks)
    if (c.name == n) return &c;
  return nullptr;
}

json ScenarioReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    json j{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}};
    if (c.soft) j["soft"] = true;
    cs.push_back(j);
  }
  json j{{"name", name}, {"title", title}, {"pass", pass()}, {"checks", cs}, {"notes", notes}, {"artifacts", artifacts}};
  if (!aborted.empty()) j["aborted_at"] = aborted;
  return j;
}

std::string ScenarioReport::summary() const {
  std::ostringstream os;
  os << name << ": " << title << "\n";
  for (const auto& c : checks) {
    os << "  [" << (c.pass ? "pass" : (c.soft ? "soft" : "FAIL")) << "] " << c.name;
    if (!c.detail.empty() && c.detail.size() <= 160) os << " (" << c.detail << ")";
    os << "\n";
  }
  for (const auto& n : notes) os << "  note: " << n << "\n";
  if (!aborted.empty()) os << "  aborted at step " << aborted << "\n";
  os << "  => " << (pass() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : runners()) names.push_back(k);
  return names;
}

ScenarioReport reproduce(const std::string& name, const ScenarioOptions& opts) {
  json fx = load_fixture("scenario_" + name);
  auto it = runners().find(name);
  if (it == runners().end()) throw std::runtime_error("no pipeline for scenario: " + name);
  ScenarioReport rep;
  rep.name = name;
  rep.title = fx.value("title", name);
  it->second(fx, opts, rep);
  return rep;
}

}  // namespace nhtori
