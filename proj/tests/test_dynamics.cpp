#include <doctest.h>

#include "nhtori/dynamics.hpp"
#include "nhtori/fixtures.hpp"
#include "nhtori/gentrig.hpp"
#include "nhtori/lyapunov.hpp"
#include "nhtori/poly_parse.hpp"

#include <cmath>
#include <random>

using namespace nhtori;

namespace {

ODESystem planar(const std::string& xd, const std::string& yd, const std::map<std::string, double>& p = {}) {
  return ODESystem({parse_poly(xd), parse_poly(yd)}, {"x", "y"}, p);
}

// X1 = (x A, y A, B) with s = x^2 + y^2 and u = (s - 4) / 4 gives
// u' = eps s V1, z' = eps s V2 where V has the attracting cycle u^2 + z^2 = 1/16.
Field3DSpec synthetic_torus() {
  Field3DSpec f;
  f.name = "synthetic";
  f.m = 7;
  f.n = 1;
  const std::string s = "(x^2 + y^2)";
  const std::string u = "((" + s + " - 4)/4)";
  const std::string q = "(1/16 - " + u + "^2 - z^2)";
  const std::string v1 = "(-z + " + u + "*" + q + ")";
  const std::string v2 = "(" + u + " + z*" + q + ")";
  f.order1 = {parse_poly("2*x*" + v1), parse_poly("2*y*" + v1), parse_poly(s + "*" + v2)};
  return f;
}

double synthetic_level(const std::array<double, 2>& p) {
  const double u = (p[0] * p[0] - 4) / 4;
  return u * u + p[1] * p[1] - 1.0 / 16;
}

TorusOptions synthetic_options() {
  TorusOptions o;
  o.center = {2, 0};
  o.direction = {1, 0};
  for (double s = 0.05; s < 0.46; s += 0.05) o.scan.push_back(s);
  o.seeds = {{2.2, 0.0}};
  o.transient = 150;
  return o;
}

}  // namespace

TEST_CASE("compiled right-hand side agrees with exact evaluation") {
  auto spec = Field3DSpec::from_json(load_fixture("zhopf3tori"));
  std::map<std::string, double> P{{"tau", -6e-6}, {"beta", 6e-3}, {"delta", 6e-2}};
  const double eps = 0.01;
  ODESystem f = ODESystem::from_field(spec, eps, P);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> x{U(rng), U(rng), U(rng)};
    std::map<std::string, Rational> vals;
    for (const auto& [n, v] : P) vals[n] = rational_from_double(v);
    vals["x"] = rational_from_double(x[0]);
    vals["y"] = rational_from_double(x[1]);
    vals["z"] = rational_from_double(x[2]);
    auto dx = f.eval(x);
    for (int i = 0; i < 3; ++i) {
      const double exact = to_double(to_rational_poly(f.exact_rhs()[i]).evaluate(vals));
      CHECK(std::abs(dx[i] - exact) <= 1e-14 * std::max(1.0, std::abs(exact)));
    }
    // Jacobian against central differences.
    double J[9];
    f.jacobian(x.data(), J);
    for (int j = 0; j < 3; ++j) {
      auto xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      auto fp = f.eval(xp), fm = f.eval(xm);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(J[i * 3 + j] - (fp[i] - fm[i]) / 2e-6) < 1e-6);
    }
  }
  CHECK_THROWS(ODESystem({parse_poly("x + a")}, {"x"}));
}

TEST_CASE("harmonic oscillator returns after one period") {
  ODESystem h = planar("-y", "x");
  IntegrateOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  auto tr = integrate(h, {1, 0}, 0, 2 * M_PI, o);
  REQUIRE(tr.ok());
  CHECK(std::abs(tr.x.back()[0] - 1) < 1e-10);
  CHECK(std::abs(tr.x.back()[1]) < 1e-10);
  auto c = next_crossing(h, {1, 0}, Section::coordinate(2, 1, 0.0, 1), 10, o);
  REQUIRE(c.ok());
  CHECK(std::abs(c.t - 2 * M_PI) < 1e-10);
  CHECK_THROWS(integrate(h, {1, 0}, 0, 1, IntegrateOptions{0, 1e-12}));
}

TEST_CASE("unperturbed n = 2 flow: period and first integral") {
  ODESystem x0 = planar("-y", "x^3");
  IntegrateOptions o;
  o.rtol = 1e-13;
  o.atol = 1e-15;
  // From (1, 0) the flow is (Cs, Sn); the first return to y = 0 upward is one period.
  auto c = next_crossing(x0, {1, 0}, Section::coordinate(2, 1, 0.0, 1), 20, o);
  REQUIRE(c.ok());
  CHECK(std::abs(c.t - period_value(2)) < 1e-10);
  CHECK(std::abs(c.t - period(2).to_double()) < 1e-10);
  auto tr = integrate(x0, {1, 0}, 0, 3 * period_value(2), o, true);
  REQUIRE(tr.ok());
  double worst = 0;
  for (const auto& x : tr.x) worst = std::max(worst, std::abs(2 * x[1] * x[1] + std::pow(x[0], 4) - 1));
  CHECK(worst < 1e-10);
}

TEST_CASE("integrator order from step counts and global error") {
  ODESystem h = planar("-y", "x");
  auto run = [&](double tol) {
    IntegrateOptions o;
    o.rtol = tol;
    o.atol = tol;
    auto tr = integrate(h, {1, 0}, 0, 20, o);
    const double err = std::hypot(tr.x.back()[0] - std::cos(20.0), tr.x.back()[1] - std::sin(20.0));
    return std::make_pair(static_cast<double>(tr.steps), err);
  };
  // Steps scale like tol^(-1/5) for a 5(4) pair: 1e5 in tol gives 10x steps.
  auto [s1, e1] = run(1e-6);
  auto [s2, e2] = run(1e-11);
  const double ratio = s2 / s1;
  CHECK(ratio > 7);
  CHECK(ratio < 14);
  // Global error proportional to the tolerance.
  const double slope = std::log10(e1 / e2) / 5;
  CHECK(slope > 0.8);
  CHECK(slope < 1.4);
  auto [s3, e3] = run(5e-7);
  CHECK(e3 < e1);
  CHECK(s3 >= s1);
}

TEST_CASE("blow-up and escape are reported") {
  ODESystem b = ODESystem({parse_poly("x^2")}, {"x"});
  auto tr = integrate(b, {1}, 0, 2);
  CHECK_FALSE(tr.ok());
  CHECK((tr.status == "escape" || tr.status == "blow-up"));
  CHECK(tr.t.back() < 1.0);
}

TEST_CASE("Van der Pol limit cycle") {
  ODESystem vdp = planar("y", "(1 - x^2)*y - x");
  auto lc = find_limit_cycle(vdp, {2, 0}, 6.6);
  REQUIRE(lc.found());
  CHECK(std::abs(lc.period - 6.663286859323130) < 1e-8);
  CHECK(lc.stable);
  CHECK(lc.multiplier < 1);
  CHECK(lc.multiplier > 0);
  CHECK(std::abs(lc.monodromy_det - lc.liouville) < 1e-6);
  CHECK(std::abs(lc.multiplier - lc.liouville) < 1e-6);
  CHECK(lc.residual < 1e-10);
  // The point returns to itself after one period.
  auto tr = integrate(vdp, lc.point, 0, lc.period);
  CHECK(std::hypot(tr.x.back()[0] - lc.point[0], tr.x.back()[1] - lc.point[1]) < 1e-8);
}

TEST_CASE("linear center is flagged non-hyperbolic") {
  auto lc = find_limit_cycle(planar("-y", "x"), {1, 0}, 6.3);
  CHECK(lc.status == "non-hyperbolic");
  CHECK_FALSE(lc.found());
  CHECK_THROWS(find_limit_cycle(planar("-y", "x"), {0, 0}, 6.3));
}

TEST_CASE("Lienard system with two cycles predicted by averaging") {
  // x' = y - F(x), y' = -x with F = eps (a1 x + a3 x^3 + a5 x^5); the averaged
  // amplitude equation vanishes at r = 1/2 and r = 1 for these coefficients.
  const double eps = 0.05;
  const double a5 = 1, a3 = -25.0 / 24, a1 = 5.0 / 32;
  std::map<std::string, double> p{{"e", eps}, {"a1", a1}, {"a3", a3}, {"a5", a5}};
  ODESystem lie = planar("y - e*(a1*x + a3*x^3 + a5*x^5)", "-x", p);
  auto inner = find_limit_cycle(lie, {0.5, 0}, 2 * M_PI);
  auto outer = find_limit_cycle(lie, {1.0, 0}, 2 * M_PI);
  REQUIRE(inner.found());
  REQUIRE(outer.found());
  CHECK_FALSE(inner.stable);
  CHECK(outer.stable);
  auto amp = [&](const LimitCycle& lc) {
    auto tr = integrate(lie, lc.point, 0, lc.period, {}, true);
    double m = 0;
    for (const auto& x : tr.x) m = std::max(m, std::abs(x[0]));
    return m;
  };
  CHECK(std::abs(amp(inner) - 0.5) < 0.05);
  CHECK(std::abs(amp(outer) - 1.0) < 0.05);
  for (const auto* lc : {&inner, &outer}) CHECK(std::abs(lc->monodromy_det - lc->liouville) < 1e-6);
}

TEST_CASE("degenerate Hopf unfolding: first step has one cycle") {
  auto J = PlanarJordanSystem::from_json(load_fixture("zhquadratic_ex_jordan"));
  auto L = lyapunov_coefficients(J, 3);
  std::map<std::string, Rational> pt{{"alpha", Rational(-9) / Rational(5)}, {"beta", Rational(-52) / Rational(75)}};
  UnfoldOptions uo;
  uo.ratio = 0.3;
  auto steps = unfold_schedule(L.L, pt, 3, uo);
  REQUIRE(steps.size() == 3);
  REQUIRE(steps[0].expected_cycles == 1);
  ODESystem sys = ODESystem::from_jordan(J, steps[0].params, steps[0].tau);
  // Amplitude from the truncated averaged equation L2 (5/16) s^2 + L3 (35/128) s^3 = 0.
  const double l2 = eval_double(L.L[1], steps[0].params), l3 = eval_double(L.L[2], steps[0].params);
  const double rho = std::sqrt(-(5.0 / 16) * l2 / ((35.0 / 128) * l3));
  auto lc = find_limit_cycle(sys, {rho, 0}, 2 * M_PI);
  REQUIRE(lc.found());
  // L2 < 0 inside, L3 > 0 outside: the cycle repels.
  CHECK_FALSE(lc.stable);
  CHECK(lc.multiplier > 1 + 1e-4);
  CHECK(std::abs(lc.monodromy_det - lc.liouville) < 1e-6);
  CHECK(std::hypot(lc.point[0], lc.point[1]) < 1.0);
  // With the default ratio the same cycle is within the hyperbolicity margin.
  auto weak = unfold_schedule(L.L, pt, 3);
  ODESystem ws = ODESystem::from_jordan(J, weak[0].params, weak[0].tau);
  const double l2w = eval_double(L.L[1], weak[0].params), l3w = eval_double(L.L[2], weak[0].params);
  const double rw = std::sqrt(-(5.0 / 16) * l2w / ((35.0 / 128) * l3w));
  auto lw = find_limit_cycle(ws, {rw, 0}, 2 * M_PI);
  CHECK(lw.status == "non-hyperbolic");
}

TEST_CASE("closed-curve fit") {
  std::vector<std::array<double, 2>> pts;
  for (int k = 0; k < 300; ++k) {
    const double a = 0.37 * k;
    const double r = 0.5 + 0.05 * std::cos(2 * a);
    pts.push_back({1 + r * std::cos(a), -2 + r * std::sin(a)});
  }
  auto fit = fit_closed_curve(pts, 8, 1e-3);
  CHECK(fit.monotone);
  CHECK(fit.closed);
  CHECK(fit.residual < 1e-3);
  CHECK(std::abs(fit.diameter - 1.0) < 0.05);
  // A spiral does not close.
  std::vector<std::array<double, 2>> sp;
  for (int k = 0; k < 300; ++k) {
    const double a = 0.37 * k, r = 0.2 + 0.002 * k;
    sp.push_back({r * std::cos(a), r * std::sin(a)});
  }
  CHECK_FALSE(fit_closed_curve(sp, 8, 1e-3).closed);
  // Fixed points do not advance.
  std::vector<std::array<double, 2>> still(50, {1.0, 1.0});
  CHECK_FALSE(fit_closed_curve(still, 8, 1e-3).closed);
}

TEST_CASE("synthetic normally hyperbolic torus") {
  Field3DSpec f = synthetic_torus();
  const double eps = 0.01;
  ODESystem field = ODESystem::from_field(f, eps, {});
  TorusOptions o = synthetic_options();
  auto ev = torus_evidence(field, eps, o);
  REQUIRE(ev.count == 1);
  const auto& c = ev.circles[0];
  CHECK(c.source == "scan");
  CHECK(c.attracting);
  CHECK(std::abs(c.s - (std::sqrt(5.0) - 2)) < 1e-6);
  CHECK(c.contraction_inside < 1);
  CHECK(c.contraction_outside < 1);
  // The seed orbit converges onto the same circle.
  REQUIRE(ev.seeds.size() == 2);
  INFO(ev.seeds[0].fit.to_json().dump());
  CHECK(ev.seeds[0].fit.closed);
  CHECK(ev.seeds[0].fit.monotone);
  double worst = 0;
  for (const auto& p : ev.seeds[0].points) worst = std::max(worst, std::abs(synthetic_level(p)));
  CHECK(worst < 1e-3);
  for (const auto& p : ev.seeds[1].points) CHECK(std::abs(synthetic_level(p)) < 1e-6);
  // Same count at a tenth of the tolerance.
  o.integ.rtol /= 10;
  o.integ.atol /= 10;
  auto ev2 = torus_evidence(field, eps, o);
  CHECK(ev2.count == 1);
  CHECK(std::abs(ev2.circles[0].s - c.s) < 1e-6);
  auto j = ev.to_json();
  CHECK(j["count"] == 1);
  CHECK(section_csv(ev).find("circle,0,") != std::string::npos);
  CHECK(section_svg(ev).find("<svg") == 0);
}

TEST_CASE("eps = 0 is degenerate") {
  Field3DSpec f = synthetic_torus();
  ODESystem field = ODESystem::from_field(f, 0.0, {});
  auto ev = torus_evidence(field, 0.0, synthetic_options());
  CHECK(ev.count == 0);
  CHECK(ev.circles.empty());
  CHECK(ev.note.find("degenerate") != std::string::npos);
  CHECK_THROWS(torus_evidence(field, -1.0, synthetic_options()));
}

TEST_CASE("eps sweep aggregation is deterministic") {
  Field3DSpec f = synthetic_torus();
  TorusOptions o = synthetic_options();
  o.seeds.clear();
  auto eps = log_sweep(2e-2, 1e-2, 2);
  REQUIRE(eps.size() == 2);
  auto a = eps_sweep(f, {}, eps, o, 1, 1);
  auto b = eps_sweep(f, {}, eps, o, 1, 2);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.best_count == 1);
  CHECK(a.hits.size() == 2);
}
