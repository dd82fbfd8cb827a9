#include <doctest.h>

#include "nhtori/ideal.hpp"
#include "nhtori/poly_eval.hpp"
#include "nhtori/poly_json.hpp"
#include "nhtori/poly_parse.hpp"

#include <random>

using namespace nhtori;

namespace {

Rational random_rational(std::mt19937_64& rng, int span = 20) {
  std::uniform_int_distribution<int> num(-span, span);
  std::uniform_int_distribution<int> den(1, span);
  return frac(num(rng), den(rng));
}

RatPoly random_poly(std::mt19937_64& rng, const VarList& vars, int terms, int max_deg) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::vector<RatPoly::Term> out;
  for (int i = 0; i < terms; ++i) {
    std::vector<int> e(vars->size());
    for (auto& v : e) v = deg(rng);
    out.emplace_back(e, random_rational(rng));
  }
  return RatPoly(vars, out);
}

}  // namespace

TEST_CASE("rational parsing and rounding") {
  CHECK(parse_rational("-3/6") == frac(-1, 2));
  CHECK(parse_rational("1.25e-2") == frac(1, 80));
  CHECK(parse_rational("-0.1121033429") == parse_rational("-1121033429/10000000000"));
  CHECK(round_decimal(frac(-5, 2), 0) == -3);
}

TEST_CASE("gamma normalization into the constant basis") {
  ConstScalar g14 = ConstScalar::gamma(frac(1, 4));
  ConstScalar expected = ConstScalar::rational_power(2, frac(1, 2)) * ConstScalar::pi() / ConstScalar::gamma(frac(3, 4));
  CHECK(g14 == expected);
  CHECK(parse_const("Gamma(1/4)") == parse_const("sqrt(2)*pi/Gamma(3/4)"));
  CHECK(ConstScalar::gamma(frac(1, 2)) * ConstScalar::gamma(frac(1, 2)) == ConstScalar::pi());
  CHECK(ConstScalar::gamma(5) == ConstScalar(24));
  // Gamma(1/6) Gamma(5/6) = 2 pi
  CHECK(ConstScalar::gamma(frac(1, 6)) * ConstScalar::gamma(frac(5, 6)) == ConstScalar(2) * ConstScalar::pi());
  // Gamma(1/3) Gamma(2/3) = 2 pi / sqrt 3
  CHECK(ConstScalar::gamma(frac(1, 3)) * ConstScalar::gamma(frac(2, 3)) ==
        parse_const("2*pi/sqrt(3)"));
  Interval g = ConstScalar::gamma(frac(1, 4)).enclosure(200);
  CHECK(abs(g.midpoint() - parse_rational("3.6256099082219083119306851558676720029951676828800654674333")) < frac(1, 1000000) * frac(1, 1000000) * frac(1, 1000000) * frac(1, 1000000) * frac(1, 1000000));
}

TEST_CASE("constant enclosures multiply soundly") {
  std::mt19937_64 rng(7);
  std::vector<ConstScalar> pool = {ConstScalar::pi(), ConstScalar::gamma(frac(3, 4)), ConstScalar::gamma(frac(2, 3)),
                                   parse_const("2^(1/3)*sqrt(3)"), parse_const("pi^2/Gamma(3/4)^4")};
  for (int trial = 0; trial < 50; ++trial) {
    ConstScalar a = pool[rng() % pool.size()] * ConstScalar(random_rational(rng)) + ConstScalar(random_rational(rng));
    ConstScalar b = pool[rng() % pool.size()] * ConstScalar(random_rational(rng));
    Interval ea = a.enclosure(256);
    Interval eb = b.enclosure(256);
    Interval eab = (a * b).enclosure(256);
    Interval prod = ea * eb;
    // both enclose the exact value, so they must overlap; the product enclosure is tight to 50 digits
    CHECK(eab.lower() <= prod.upper());
    CHECK(prod.lower() <= eab.upper());
    Rational scale = std::max(Rational(1), eab.magnitude());
    CHECK(eab.width() < scale * pow(Rational(10), -50));
  }
}

TEST_CASE("parser and canonical JSON round trip") {
  MultiPoly p = parse_poly("x^2 - 5*pi^2/(9*Gamma(3/4)^4)*l1*x^3 + 1/2*y/omega");
  CHECK(p.size() == 3);
  MultiPoly q = multipoly_from_json(to_json(p));
  CHECK(p == q);
  CHECK(parse_poly("(x+1)^2") == parse_poly("x^2+2*x+1"));
  CHECK_THROWS(parse_poly("x/(x+1)"));
  CHECK_THROWS(parse_poly("x", {"y"}));
}

TEST_CASE("substitution") {
  MultiPoly p = parse_poly("x^2");
  std::map<std::string, MultiPoly> b{{"x", parse_poly("x+1")}};
  CHECK(p.substitute(b) == parse_poly("x^2+2*x+1"));
  CHECK_THROWS(p.substitute({{"z", parse_poly("1")}}));

  std::mt19937_64 rng(11);
  VarList vars = make_vars({"x", "y", "z"});
  for (int trial = 0; trial < 5; ++trial) {
    RatPoly f = random_poly(rng, vars, 6, 3);
    RatPoly gx = random_poly(rng, make_vars({"x", "y"}), 3, 2);
    RatPoly gy = random_poly(rng, make_vars({"z"}), 2, 2);
    RatPoly comp = f.substitute({{"x", gx}, {"y", gy}});
    for (int pt = 0; pt < 20; ++pt) {
      std::map<std::string, Rational> point{{"x", random_rational(rng)}, {"y", random_rational(rng)}, {"z", random_rational(rng)}};
      std::map<std::string, Rational> inner = point;
      inner["x"] = gx.evaluate(point);
      inner["y"] = gy.evaluate(point);
      CHECK(comp.evaluate(point) == f.evaluate(inner));
    }
  }
}

TEST_CASE("division identity") {
  RatPoly g = parse_rat_poly("x*y - 1");
  auto r = reduce_mod_ideal(g, {g});
  CHECK(r.remainder.is_zero());

  std::mt19937_64 rng(3);
  VarList vars = make_vars({"a", "b", "c"});
  for (MonomialOrder order : {MonomialOrder::kLex, MonomialOrder::kGrLex, MonomialOrder::kGrevLex}) {
    for (int trial = 0; trial < 10; ++trial) {
      RatPoly p = random_poly(rng, vars, 8, 4);
      std::vector<RatPoly> gens = {random_poly(rng, vars, 3, 2), random_poly(rng, vars, 3, 2)};
      OrderSpec spec{order, {"b", "a", "c"}};
      auto res = reduce_mod_ideal(p, gens, spec);
      RatPoly rebuilt = res.remainder;
      for (std::size_t i = 0; i < gens.size(); ++i) rebuilt += res.quotients[i] * gens[i];
      CHECK(rebuilt == p);
    }
  }
  // Laurent generator
  RatPoly lg = parse_rat_poly("(a + 2*b)/w");
  auto res = reduce_mod_ideal(parse_rat_poly("a^2/w^3 + b"), {lg}, {MonomialOrder::kLex, {"a"}});
  CHECK(res.remainder + res.quotients[0] * lg == parse_rat_poly("a^2/w^3 + b"));
  CHECK(res.remainder.degree(res.remainder.var_index("a")) == 0);
}

TEST_CASE("rank at a point") {
  std::vector<RatPoly> fs = {parse_rat_poly("l1"), parse_rat_poly("l2")};
  CHECK(rank_at(fs, {}, {"l1", "l2"}) == 2);
  std::vector<RatPoly> dep = {parse_rat_poly("l1 + l2"), parse_rat_poly("2*l1 + 2*l2 + l1^2")};
  CHECK(rank_at(dep, {{"l1", 0}, {"l2", 0}}, {"l1", "l2"}) == 1);
  std::vector<MultiPoly> tr = {parse_poly("pi*l1")};
  CHECK_THROWS_AS(rank_at(tr, {{"l1", 0}}, {"l1"}), std::domain_error);
}

TEST_CASE("interval evaluation") {
  MultiPoly x = parse_poly("x");
  IntervalBox box{{"x", Interval(Rational(-1), Rational(1))}};
  Interval r = interval_eval(x, box);
  CHECK(r.lower() == -1);
  CHECK(r.upper() == 1);

  MultiPoly q = parse_poly("x^2 - x");
  Interval rq = interval_eval(q, {{"x", Interval(Rational(0), Rational(1))}});
  CHECK(rq.contains(Interval(frac(-1, 4), Rational(0))));

  std::mt19937_64 rng(5);
  MultiPoly p = parse_poly("3*x^3*y - pi*x*y^2 + 2/7*y^4 - x + 1/3");
  IntervalBox big{{"x", Interval(Rational(-2), frac(3, 2))}, {"y", Interval(frac(-1, 3), Rational(2))}};
  Interval whole = interval_eval(p, big);
  Interval whole_rounded = interval_eval(p, big, 128);
  for (int i = 0; i < 1000; ++i) {
    Rational px = Rational(-2) + Rational(static_cast<long>(rng() % 3501), 1000);
    Rational py = frac(-1, 3) + Rational(static_cast<long>(rng() % 2334), 1000);
    Interval pt = interval_eval(p, {{"x", Interval(px)}, {"y", Interval(py)}});
    CHECK(whole.contains(pt));
    CHECK(whole_rounded.contains(pt));
  }
  // inclusion monotonicity
  IntervalBox small{{"x", Interval(Rational(-1), Rational(1))}, {"y", Interval(Rational(0), Rational(1))}};
  CHECK(whole.contains(interval_eval(p, small)));
}

TEST_CASE("interval rank lower bound") {
  IntervalMatrix m(2, 2);
  m(0, 0) = Interval(Rational(1));
  m(1, 1) = Interval(frac(99, 100), frac(101, 100));
  m(0, 1) = Interval(frac(-1, 100), frac(1, 100));
  CHECK(interval_rank_lower_bound(m) == 2);
  m(1, 1) = Interval(Rational(-1), Rational(1));
  CHECK(interval_rank_lower_bound(m) == 1);
}
