#include <doctest.h>

#include "nhtori/certify.hpp"
#include "nhtori/poly_eval.hpp"
#include "nhtori/poly_parse.hpp"

#include <cmath>
#include <random>

using namespace nhtori;

namespace {

RatPoly R(const std::string& s) { return parse_rat_poly(s); }

Rational rnd(std::mt19937_64& rng, int span = 9) {
  std::uniform_int_distribution<int> num(-span, span), den(1, span);
  return frac(num(rng), den(rng));
}

}  // namespace

TEST_CASE("identity Jacobian is left unchanged") {
  std::vector<RatPoly> fs{R("x + x*y"), R("y - x^2")};
  auto pre = affine_precondition(fs, {"x", "y"}, {Rational(0), Rational(0)});
  CHECK(pre.map.A[0][0] == 1);
  CHECK(pre.map.A[0][1] == 0);
  CHECK(pre.g[0] == R("u1 + u1*u2"));
  CHECK(pre.g[1] == R("u2 - u1^2"));
}

TEST_CASE("random quadratic maps are preconditioned to the identity") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<RatPoly> fs;
    for (int i = 0; i < 3; ++i) {
      RatPoly f = R("0");
      f += R("x") * Rational(rnd(rng) + (i == 0 ? 5 : 0));
      f += R("y") * Rational(rnd(rng) + (i == 1 ? 5 : 0));
      f += R("z") * Rational(rnd(rng) + (i == 2 ? 5 : 0));
      f += R("x*y") * rnd(rng) + R("z^2") * rnd(rng) + R("1") * rnd(rng);
      fs.push_back(f);
    }
    std::vector<Rational> pt{frac(1, 7), frac(-2, 9), frac(1, 3)};
    auto pre = affine_precondition(fs, {"x", "y", "z"}, pt, {12});
    std::map<std::string, Rational> zero{{"u1", 0}, {"u2", 0}, {"u3", 0}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Rational d = pre.g[i].derivative("u" + std::to_string(j + 1)).evaluate(zero);
        CHECK(std::fabs(d.get_d() - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
  }
  CHECK_THROWS_AS(affine_precondition({R("x + y"), R("2*x + 2*y")}, {"x", "y"}, {Rational(0), Rational(0)}),
                  std::domain_error);
}

TEST_CASE("Poincare-Miranda sign test") {
  auto c = pm_check({R("x")}, {"x"}, Box::cube({Rational(0)}, Rational(1)));
  CHECK(c.certified());
  CHECK(c.faces.size() == 2);
  // decreasing function is fine as well
  CHECK(pm_check({R("-x")}, {"x"}, Box::cube({Rational(0)}, Rational(1))).certified());
  // a zero on a face cannot be certified by the raw system
  std::vector<RatPoly> circle{R("x^2 + y^2 - 2"), R("x - y")};
  Box b = Box::cube({Rational(1), Rational(1)}, frac(1, 5));
  CHECK_FALSE(pm_check(circle, {"x", "y"}, b).certified());
  auto cert = certify_simple_zero(circle, {"x", "y"}, {Rational(1), Rational(1)}, frac(1, 5));
  CHECK(cert.certified());
  CHECK(cert.pm.certified());
  CHECK_THROWS(pm_check({R("x")}, {"x"}, Box{{Rational(0)}, {Rational(0)}}));
}

TEST_CASE("Gerschgorin disks") {
  IntervalMatrix I(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) I(i, j) = Interval(Rational(i == j ? 1 : 0));
  CHECK(gerschgorin_regular(I).nonsingular());
  IntervalMatrix Z = I;
  Z(1, 1) = Interval(Rational(0));
  CHECK_FALSE(gerschgorin_regular(Z).nonsingular());
  IntervalMatrix W = I;
  W(0, 1) = Interval(frac(-1, 2), frac(1, 2));
  W(0, 2) = Interval(frac(1, 2), frac(3, 5));
  CHECK_FALSE(gerschgorin_regular(W).nonsingular());
  CHECK(gerschgorin_regular(W).radius[0] == frac(11, 10));
}

TEST_CASE("double roots are not certified") {
  auto c = certify_simple_zero({R("x^2 + x/1000000")}, {"x"}, {frac(1, 10000000)}, frac(1, 100));
  CHECK_FALSE(c.certified());
  CHECK_THROWS(certify_simple_zero({R("x^2")}, {"x"}, {Rational(0)}, frac(1, 100)));
}

TEST_CASE("random affine maps with known roots") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rational> root{rnd(rng), rnd(rng), rnd(rng)};
    std::vector<std::string> vars{"a", "b", "c"};
    std::vector<RatPoly> fs;
    for (int i = 0; i < 3; ++i) {
      RatPoly f = R("0");
      for (int j = 0; j < 3; ++j) {
        Rational coef = rnd(rng) + (i == j ? Rational(20) : Rational(0));
        f += (R(vars[j]) - RatPoly::constant(root[j])) * coef;
      }
      fs.push_back(f);
    }
    std::vector<Rational> guess = root;
    for (auto& g : guess) g += frac(1, 100000);
    auto c = certify_simple_zero(fs, vars, guess, frac(1, 100));
    CHECK(c.certified());
  }
}

TEST_CASE("certificates replay at doubled precision") {
  std::mt19937_64 rng(41);
  std::vector<RatPoly> fs{R("x^3 - 2*x*y + 1/3"), R("y^2 + x - 5/4")};
  auto seed = newton_refine(fs, {"x", "y"}, {frac(1, 2), Rational(1)}, 40, 30);
  auto c = certify_simple_zero(fs, {"x", "y"}, seed, pow(Rational(10), -8), CertifyOptions{{}, 64});
  REQUIRE(c.certified());
  for (unsigned bits : {128u, 256u, 0u}) {
    auto replay = pm_check(c.system.g, c.system.map.uvars, c.pm.box, bits);
    CHECK(replay.certified());
    for (std::size_t f = 0; f < replay.faces.size(); ++f) {
      CHECK(replay.faces[f].value.strictly_positive() == c.pm.faces[f].value.strictly_positive());
      CHECK(c.pm.faces[f].value.contains(replay.faces[f].value));
    }
  }
}

TEST_CASE("no certificate on boxes without zeros") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    Rational shift = Rational(1) + abs(rnd(rng));
    std::vector<RatPoly> fs{R("x^2 + y^2") + RatPoly::constant(shift), R("x") * rnd(rng) + R("y") * rnd(rng)};
    Box b = Box::cube({rnd(rng), rnd(rng)}, frac(1, 2));
    auto c = pm_check(fs, {"x", "y"}, b, 64);
    CHECK_FALSE(c.certified());
    // dense sampling confirms f1 > 0
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) {
        std::map<std::string, Rational> p{{"x", b.center[0] - frac(1, 2) + frac(i, 10)},
                                          {"y", b.center[1] - frac(1, 2) + frac(j, 10)}};
        CHECK(fs[0].evaluate(p) > 0);
      }
  }
}

TEST_CASE("Newton refinement") {
  auto r = newton_refine({R("x^2 - 2")}, {"x"}, {Rational(1)}, 20, 40);
  CHECK(std::fabs(r[0].get_d() - std::sqrt(2.0)) < 1e-15);
  CHECK(abs(r[0] * r[0] - 2) < pow(Rational(10), -38));
}

TEST_CASE("certificate JSON uses exact endpoints") {
  auto c = certify_simple_zero({R("x - 1/3")}, {"x"}, {frac(1, 3)}, frac(1, 10));
  auto j = c.to_json();
  CHECK(j["verdict"] == "simple zero certified");
  CHECK(j["poincare_miranda"]["faces"][0]["enclosure"]["lower"] == "1/10");
}
