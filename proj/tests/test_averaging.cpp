#include <doctest.h>

#include "nhtori/averaging.hpp"
#include "nhtori/fixtures.hpp"
#include "nhtori/gentrig.hpp"
#include "nhtori/poly_eval.hpp"
#include "nhtori/poly_parse.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <set>

using namespace nhtori;

namespace {

Rational random_rational(std::mt19937_64& rng, int span = 9) {
  std::uniform_int_distribution<int> num(-span, span);
  std::uniform_int_distribution<int> den(1, span);
  return frac(num(rng), den(rng));
}

/// Random field over x,y,z without parameters. With `nonadmissible_only`
/// every first-order monomial violates the parity table.
Field3DSpec random_spec(std::mt19937_64& rng, int m, int n, bool nonadmissible_only, bool with_order2) {
  Field3DSpec s;
  s.name = "random";
  s.m = m;
  s.n = n;
  VarList vl = make_vars({"x", "y", "z"});
  std::uniform_int_distribution<int> coin(0, 2);
  for (int order = 1; order <= 2; ++order) {
    auto& table = order == 1 ? s.order1 : s.order2;
    for (int c = 0; c < 3; ++c) {
      table[c] = MultiPoly(vl);
      if (order == 2 && !with_order2) continue;
      for (int d = 0; d <= m; ++d) {
        for (int j = 0; j <= d; ++j) {
          for (int k = 0; j + k <= d; ++k) {
            int l = d - j - k;
            if (order == 1 && nonadmissible_only && admissible(c, j, k, l)) continue;
            if (coin(rng) != 0) continue;
            table[c] += MultiPoly::monomial(vl, {j, k, l}, ConstScalar(random_rational(rng)));
          }
        }
      }
    }
  }
  return s;
}

long double eval_series_term(const TrigSeries& f, const std::vector<std::string>& order, const long double* point,
                             long double cs, long double sn) {
  long double sum = 0.0L;
  for (const auto& [key, coef] : f) {
    CompiledPoly cp(coef, order);
    sum += cp(point) * std::pow(sn, key.first) * std::pow(cs, key.second);
  }
  return sum;
}

std::vector<std::pair<long double, long double>> gauss_legendre(int npts) {
  std::vector<std::pair<long double, long double>> out;
  for (int i = 1; i <= npts; ++i) {
    long double x = std::cos(M_PI * (i - 0.25L) / (npts + 0.5L));
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L;
      long double p1 = x;
      for (int k = 2; k <= npts; ++k) {
        long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      long double dp = npts * (x * p1 - p0) / (x * x - 1);
      long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    long double p0 = 1.0L;
    long double p1 = x;
    for (int k = 2; k <= npts; ++k) {
      long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    long double dp = npts * (x * p1 - p0) / (x * x - 1);
    out.emplace_back(x, 2.0L / ((1 - x * x) * dp * dp));
  }
  return out;
}

long double integrate(const std::function<long double(long double)>& f, long double a, long double b, int panels = 6) {
  static const auto rule = gauss_legendre(24);
  long double sum = 0.0L;
  long double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    long double lo = a + p * h;
    for (const auto& [x, w] : rule) sum += w * f(lo + (x + 1) * h / 2) * h / 2;
  }
  return sum;
}

GuidingSystem load_guiding(const std::string& name) { return GuidingSystem::from_json(load_fixture(name)); }

}  // namespace

TEST_CASE("zero perturbation gives zero standard form") {
  Field3DSpec s;
  s.m = 2;
  s.n = 1;
  VarList vl = make_vars({"x", "y", "z"});
  for (auto& p : s.order1) p = MultiPoly(vl);
  for (auto& p : s.order2) p = MultiPoly(vl);
  auto sf = to_standard_form(s, 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(sf.f1[c].empty());
    CHECK(sf.f2[c].empty());
  }
  auto g2 = second_melnikov(sf);
  CHECK(g2.g1.is_zero());
  CHECK(g2.g2.is_zero());
}

TEST_CASE("first-order standard form matches the polar expansion term by term") {
  for (auto [m, n] : {std::pair{2, 1}, std::pair{3, 2}, std::pair{5, 3}}) {
    Field3DSpec s = generic_family(m, n);
    auto sf = to_standard_form(s, 1);
    std::array<TrigSeries, 2> expected;
    VarList vars = sf.vars;
    auto r_pow = [&](int e) {
      std::vector<int> ex(vars->size(), 0);
      ex[0] = e;
      return MultiPoly::monomial(vars, ex, ConstScalar(1));
    };
    auto w_pow = [&](int e) {
      std::vector<int> ex(vars->size(), 0);
      ex[1] = e;
      return MultiPoly::monomial(vars, ex, ConstScalar(1));
    };
    auto add = [&](int c, int k, int j, const MultiPoly& p) {
      auto& slot = expected[c][{k, j}];
      if (slot.vars() == nullptr || slot.nvars() == 0) slot = MultiPoly(vars);
      slot += p;
      if (slot.is_zero()) expected[c].erase({k, j});
    };
    for (const auto& name : s.params) {
      int j = name[1] - '0';
      int k = name[2] - '0';
      int l = name[3] - '0';
      MultiPoly sym = MultiPoly::variable(vars, name) * w_pow(l);
      switch (name[0]) {
        case 'a': add(0, k, 2 * n - 1 + j, sym * r_pow(j + n * k + 1 - n)); break;
        case 'b': add(0, k + 1, j, sym * r_pow(j + n * k + 2 - 2 * n)); break;
        default: add(1, k, j, sym * r_pow(j + n * k + 1 - n)); break;
      }
    }
    for (int c = 0; c < 2; ++c) {
      REQUIRE(sf.f1[c].size() == expected[c].size());
      for (const auto& [key, coef] : expected[c]) CHECK(sf.f1[c].at(key) == coef);
    }
  }
}

TEST_CASE("standard form agrees with the pulled-back vector field") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto [m, n, order] : {std::tuple{2, 1, 2}, std::tuple{3, 1, 2}, std::tuple{3, 2, 1}, std::tuple{5, 3, 1}}) {
    Field3DSpec s = random_spec(rng, m, n, false, order == 2);
    auto sf = to_standard_form(s, order);
    std::vector<std::string> field_order = {"x", "y", "z"};
    std::array<CompiledPoly, 3> X1;
    std::array<CompiledPoly, 3> X2;
    for (int c = 0; c < 3; ++c) {
      X1[c] = CompiledPoly(s.order1[c], field_order);
      X2[c] = CompiledPoly(s.order2[c], field_order);
    }
    std::vector<std::string> rw = {"r", "w"};
    for (int sample = 0; sample < 10; ++sample) {
      long double r = 0.5L + unit(rng);
      long double w = unit(rng) - 0.5L;
      double theta = 10.0 * unit(rng);
      CsSn cs = gentrig_eval(n, theta);
      long double C = cs.cs;
      long double S = cs.sn;
      long double xyz[3] = {r * C, std::pow(r, n) * S, w};
      // columns of the polar map Jacobian for (r, theta)
      long double a11 = C;
      long double a21 = n * std::pow(r, n - 1) * S;
      long double a12 = -r * S;
      long double a22 = std::pow(r, n) * std::pow(C, 2 * n - 1);
      long double det = a11 * a22 - a12 * a21;
      auto solve = [&](long double fx, long double fy) {
        return std::pair{(a22 * fx - a12 * fy) / det, (-a21 * fx + a11 * fy) / det};
      };
      auto [r0, t0] = solve(-xyz[1], std::pow(xyz[0], 2 * n - 1));
      auto [r1, t1] = solve(X1[0](xyz), X1[1](xyz));
      auto [r2, t2] = solve(X2[0](xyz), X2[1](xyz));
      CHECK(std::fabs(static_cast<double>(r0)) < 1e-12);
      long double G1r = r1 / t0;
      long double G1w = X1[2](xyz) / t0;
      long double G2r = (r2 - G1r * t1) / t0;
      long double G2w = (X2[2](xyz) - G1w * t1) / t0;
      long double point[2] = {r, w};
      CHECK(std::fabs(static_cast<double>(eval_series_term(sf.f1[0], rw, point, C, S) - G1r)) < 1e-10);
      CHECK(std::fabs(static_cast<double>(eval_series_term(sf.f1[1], rw, point, C, S) - G1w)) < 1e-10);
      if (order == 2) {
        CHECK(std::fabs(static_cast<double>(eval_series_term(sf.f2[0], rw, point, C, S) - G2r)) < 1e-10);
        CHECK(std::fabs(static_cast<double>(eval_series_term(sf.f2[1], rw, point, C, S) - G2w)) < 1e-10);
      }
    }
  }
}

TEST_CASE("generic quadratic first averaged function") {
  auto g = first_averaged(to_standard_form(generic_family(2, 1), 1));
  VarList v = g.g1.vars();
  CHECK(g.g1 == parse_poly("1/2*(a100 + b010)*r + 1/2*(a101 + b011)*r*w", *v));
  CHECK(g.g2 == parse_poly("c000 + c001*w + c002*w^2 + 1/2*(c200 + c020)*r^2", *g.g2.vars()));
}

TEST_CASE("parity and degree invariants of the first averaged function") {
  for (int m = 2; m <= 5; ++m) {
    for (int n = 1; 2 * n - 1 <= m && n <= 3; ++n) {
      Field3DSpec s = generic_family(m, n);
      auto g = first_averaged(to_standard_form(s, 1));
      int ir = g.g1.var_index("r");
      int iw = g.g1.var_index("w");
      std::vector<char> state_mask(g.g1.nvars(), 0);
      state_mask[ir] = state_mask[iw] = 1;
      CHECK(g.g1.total_degree(state_mask) <= guiding_degree(m, n));
      CHECK(g.g2.total_degree(state_mask) <= guiding_degree(m, n));
      for (const MultiPoly* p : {&g.g1, &g.g2}) {
        for (const auto& [e, c] : p->terms()) {
          CHECK(e[ir] >= 0);
          for (std::size_t i = 2; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            const std::string& name = (*p->vars())[i];
            int comp = name[0] - 'a';
            CHECK(admissible(comp, name[1] - '0', name[2] - '0', name[3] - '0'));
          }
        }
      }
      // every admissible parameter does appear
      std::size_t admissible_count = 0;
      for (const auto& name : s.params) {
        if (admissible(name[0] - 'a', name[1] - '0', name[2] - '0', name[3] - '0')) ++admissible_count;
      }
      std::set<std::string> seen;
      for (const auto& name : g.g1.used_vars()) seen.insert(name);
      for (const auto& name : g.g2.used_vars()) seen.insert(name);
      seen.erase("r");
      seen.erase("w");
      CHECK(seen.size() == admissible_count);
    }
  }
}

TEST_CASE("non-admissible monomials average to zero") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 1 + trial % 3;
    int m = 2 * n - 1 + trial % 2 + 1;
    auto s = random_spec(rng, m, n, true, false);
    auto g = first_averaged(to_standard_form(s, 1));
    CHECK(g.g1.is_zero());
    CHECK(g.g2.is_zero());
  }
}

TEST_CASE("guiding degree") {
  CHECK(guiding_degree(5, 1) == 5);
  CHECK(guiding_degree(5, 2) == 9);
  CHECK(guiding_degree(5, 3) == 13);
  CHECK(guiding_degree(2, 1) == 2);
  CHECK(guiding_degree(4, 2) == 8);
}

TEST_CASE("cubic nilpotent fixture reproduces its guiding system up to a positive scale") {
  auto s = Field3DSpec::from_json(load_fixture("znilcubic"));
  auto g = first_averaged(to_standard_form(s, 1));
  Rational factor;
  CHECK(equal_up_to_positive_scale(load_guiding("znilcubic_guiding"), g, &factor));
  CHECK(factor == frac(3, 4));
  Rational back;
  CHECK(equal_up_to_positive_scale(g, load_guiding("znilcubic_guiding"), &back));
  CHECK(back == frac(4, 3));
}

TEST_CASE("quartic nilpotent fixture reproduces its guiding system up to a positive scale") {
  auto s = Field3DSpec::from_json(load_fixture("znilquartic"));
  auto g = first_averaged(to_standard_form(s, 1));
  Rational factor;
  CHECK(equal_up_to_positive_scale(load_guiding("znilquartic_guiding"), g, &factor));
  CHECK(factor == 3);
}

TEST_CASE("scale comparison rejects negative and non-proportional pairs") {
  GuidingSystem a;
  a.g1 = parse_poly("r + r*w");
  a.g2 = parse_poly("w^2 - 1");
  GuidingSystem b = a;
  b.g1 = -a.g1;
  b.g2 = -a.g2;
  CHECK_FALSE(equal_up_to_positive_scale(a, b));
  b.g1 = a.g1 * ConstScalar(2);
  b.g2 = a.g2;
  CHECK_FALSE(equal_up_to_positive_scale(a, b));
  b.g2 = a.g2 * ConstScalar(2);
  Rational f;
  CHECK(equal_up_to_positive_scale(b, a, &f));
  CHECK(f == 2);
}

TEST_CASE("second-order averaging of the quadratic Hopf-zero example") {
  auto s = Field3DSpec::from_json(load_fixture("zhquadratic_ex"));
  auto sf = to_standard_form(s, 2);
  auto g1 = first_averaged(sf);
  CHECK(g1.g1.is_zero());
  CHECK(g1.g2.is_zero());
  auto g2 = second_melnikov(sf);
  CHECK(g2.order == 2);
  Rational factor;
  CHECK(equal_up_to_positive_scale(load_guiding("zhquadratic_ex_g2"), g2, &factor));
  CHECK(factor == 2);
}

TEST_CASE("second-order averaging requires vanishing first order") {
  auto s = Field3DSpec::from_json(load_fixture("zhopf3tori"));
  auto sf = to_standard_form(s, 2);
  CHECK_THROWS_AS(second_melnikov(sf), FirstOrderObstruction);
  try {
    second_melnikov(sf);
  } catch (const FirstOrderObstruction& e) {
    CHECK_FALSE(e.g1.g1.is_zero());
  }
  auto quartic = Field3DSpec::from_json(load_fixture("znilquartic"));
  CHECK_THROWS_AS(to_standard_form(quartic, 2), std::invalid_argument);
}

TEST_CASE("second Melnikov function matches nested quadrature") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    auto s = random_spec(rng, 2 + trial % 2, 1, true, true);
    auto sf = to_standard_form(s, 2);
    auto g2 = second_melnikov(sf);
    std::vector<std::string> rw = {"r", "w"};
    std::array<TrigSeries, 2> dr;
    std::array<TrigSeries, 2> dw;
    for (int c = 0; c < 2; ++c) {
      for (const auto& [key, coef] : sf.f1[c]) {
        dr[c][key] = coef.derivative("r");
        dw[c][key] = coef.derivative("w");
      }
    }
    for (int sample = 0; sample < 5; ++sample) {
      Rational rq = frac(1, 2) + frac(static_cast<long>(unit(rng) * 1000), 1000);
      Rational wq = frac(static_cast<long>(unit(rng) * 1000) - 500, 1000);
      long double point[2] = {rq.get_d(), wq.get_d()};
      auto at = [&](const TrigSeries& f, long double t) {
        return eval_series_term(f, rw, point, std::cos(t), std::sin(t));
      };
      std::array<long double, 2> f2{};
      for (int c = 0; c < 2; ++c) {
        f2[c] = integrate(
            [&](long double t) {
              long double y1r = integrate([&](long double u) { return at(sf.f1[0], u); }, 0.0L, t, 2);
              long double y1w = integrate([&](long double u) { return at(sf.f1[1], u); }, 0.0L, t, 2);
              return at(sf.f2[c], t) + at(dr[c], t) * y1r + at(dw[c], t) * y1w;
            },
            0.0L, 2 * M_PIl, 4);
      }
      std::map<std::string, ConstScalar> pt{{"r", ConstScalar(rq)}, {"w", ConstScalar(wq)}};
      double exact_r = g2.g1.remap(make_vars({"r", "w"})).evaluate(pt).to_double();
      double exact_w = g2.g2.remap(make_vars({"r", "w"})).evaluate(pt).to_double();
      CHECK(std::fabs(exact_r - static_cast<double>(f2[0] / (2 * M_PIl))) < 1e-10);
      CHECK(std::fabs(exact_w - static_cast<double>(f2[1] / (2 * M_PIl))) < 1e-10);
    }
  }
}

TEST_CASE("second Melnikov function is quadratic in first-order and linear in second-order data") {
  std::mt19937_64 rng(3);
  Field3DSpec s = generic_family(2, 1);
  // keep only non-admissible first-order symbols so that the first average vanishes
  std::map<std::string, MultiPoly> kill;
  VarList vars = s.order1[0].vars();
  std::vector<std::string> first_syms;
  for (const auto& name : s.params) {
    if (admissible(name[0] - 'a', name[1] - '0', name[2] - '0', name[3] - '0')) {
      kill[name] = MultiPoly(vars);
    } else {
      first_syms.push_back(name);
    }
  }
  std::vector<std::string> all_vars = *vars;
  std::vector<std::string> second_syms;
  for (const auto& name : s.params) {
    second_syms.push_back("e" + name);
    all_vars.push_back("e" + name);
  }
  VarList ext = make_vars(all_vars);
  std::map<std::string, MultiPoly> rename;
  for (const auto& name : s.params) rename[name] = MultiPoly::variable(ext, "e" + name);
  for (int c = 0; c < 3; ++c) {
    MultiPoly generic = s.order1[c].remap(ext);
    s.order2[c] = generic.substitute(rename);
    s.order1[c] = generic.substitute(std::map<std::string, MultiPoly>(kill.begin(), kill.end()));
  }
  s.params.insert(s.params.end(), second_syms.begin(), second_syms.end());
  auto g = second_melnikov(to_standard_form(s, 2));
  std::vector<char> first_mask(g.g1.nvars(), 0);
  std::vector<char> second_mask(g.g1.nvars(), 0);
  for (const auto& name : first_syms) first_mask[g.g1.var_index(name)] = 1;
  for (const auto& name : second_syms) second_mask[g.g1.var_index(name)] = 1;
  bool saw_quadratic = false;
  bool saw_linear = false;
  for (const MultiPoly* p : {&g.g1, &g.g2}) {
    std::vector<char> m1 = first_mask;
    std::vector<char> m2 = second_mask;
    for (const auto& [e, c] : p->terms()) {
      int d1 = 0;
      int d2 = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (m1[i]) d1 += e[i];
        if (m2[i]) d2 += e[i];
      }
      bool ok = (d1 == 2 && d2 == 0) || (d1 == 0 && d2 == 1);
      CHECK(ok);
      saw_quadratic = saw_quadratic || d1 == 2;
      saw_linear = saw_linear || d2 == 1;
    }
  }
  CHECK(saw_quadratic);
  CHECK(saw_linear);
  (void)rng;
}

TEST_CASE("partial Bell polynomials agree with set-partition enumeration") {
  CHECK(bell_polynomial(1, 1, {"x1"}) == parse_rat_poly("x1"));
  CHECK(bell_polynomial(3, 2, {"x1", "x2"}) == parse_rat_poly("3*x1*x2"));
  std::vector<std::string> xs = {"x1", "x2", "x3", "x4", "x5", "x6"};
  Rational total = 0;
  for (int q = 1; q <= 4; ++q) {
    auto b = bell_polynomial(4, q, xs);
    std::map<std::string, Rational> ones;
    for (const auto& v : *b.vars()) ones[v] = 1;
    total += eval_rational(b, ones);
  }
  CHECK(total == 15);
  for (int p = 1; p <= 6; ++p) {
    // restricted growth strings enumerate set partitions of {1..p}
    std::map<int, std::map<std::vector<int>, Rational>> by_blocks;
    std::vector<int> a(p, 0);
    std::function<void(int, int)> rec = [&](int i, int maxv) {
      if (i == p) {
        std::vector<int> sizes(maxv + 1, 0);
        for (int v : a) ++sizes[v];
        std::vector<int> counts(p, 0);
        for (int sz : sizes) ++counts[sz - 1];
        by_blocks[maxv + 1][counts] += 1;
        return;
      }
      for (int v = 0; v <= maxv + 1; ++v) {
        a[i] = v;
        rec(i + 1, std::max(maxv, v));
      }
    };
    a[0] = 0;
    rec(1, 0);
    for (int q = 1; q <= p; ++q) {
      auto b = bell_polynomial(p, q, xs);
      std::map<std::vector<int>, Rational> got;
      for (const auto& [e, c] : b.terms()) {
        std::vector<int> counts(p, 0);
        for (std::size_t i = 0; i < e.size(); ++i) counts[i] = e[i];
        got[counts] = c;
      }
      CHECK(got == by_blocks[q]);
    }
  }
  CHECK_THROWS_AS(bell_polynomial(2, 3, xs), std::invalid_argument);
}

TEST_CASE("field and guiding system JSON round trip") {
  auto s = Field3DSpec::from_json(load_fixture("zniln3quintic"));
  auto again = Field3DSpec::from_json(s.to_json());
  for (int c = 0; c < 3; ++c) CHECK(again.order1[c] == s.order1[c]);
  auto g = first_averaged(to_standard_form(s, 1));
  auto g_back = GuidingSystem::from_json(g.to_json());
  CHECK(g_back.g1 == g.g1);
  CHECK(g_back.g2 == g.g2);
  CHECK(g_back.order == 1);
  nlohmann::json bad = s.to_json();
  bad["order1"]["x"] = "x^6";
  CHECK_THROWS(Field3DSpec::from_json(bad));
}
