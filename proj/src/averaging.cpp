#include "nhtori/averaging.hpp"

#include "nhtori/gentrig.hpp"
#include "nhtori/poly_json.hpp"
#include "nhtori/poly_parse.hpp"

#include <functional>
#include <stdexcept>

namespace nhtori {

using nlohmann::json;

namespace {

const char* kComp[3] = {"x", "y", "z"};

std::vector<std::string> field_vars(const Field3DSpec& spec) {
  std::vector<std::string> v = {"x", "y", "z"};
  v.insert(v.end(), spec.params.begin(), spec.params.end());
  return v;
}

MultiPoly constant(const Rational& q) { return MultiPoly::constant(ConstScalar(q)); }

MultiPoly r_power(int e) {
  VarList v = make_vars({"r"});
  return MultiPoly::monomial(v, {e}, ConstScalar(1));
}

TrigSeries split_trig(const MultiPoly& p, const VarList& target) {
  TrigSeries out;
  int ics = p.var_index("Cs");
  int isn = p.var_index("Sn");
  std::map<std::pair<int, int>, std::vector<MultiPoly::Term>> groups;
  for (const auto& [e, c] : p.terms()) {
    int k = isn >= 0 ? e[isn] : 0;
    int j = ics >= 0 ? e[ics] : 0;
    auto ne = e;
    if (isn >= 0) ne[isn] = 0;
    if (ics >= 0) ne[ics] = 0;
    groups[{k, j}].emplace_back(std::move(ne), c);
  }
  for (auto& [key, terms] : groups) out.emplace(key, MultiPoly(p.vars(), std::move(terms)).remap(target));
  return out;
}

}  // namespace

bool Field3DSpec::has_order2() const {
  return std::any_of(order2.begin(), order2.end(), [](const MultiPoly& p) { return !p.is_zero(); });
}

MultiPoly Field3DSpec::coefficient(int order, int comp, int j, int k, int l) const {
  const MultiPoly& p = (order == 1 ? order1 : order2).at(comp);
  return coefficient_of(p, {{"x", j}, {"y", k}, {"z", l}});
}

void Field3DSpec::validate() const {
  if (n < 1) throw std::invalid_argument("Andreev number must be positive");
  if (2 * n - 1 > m) throw std::invalid_argument("2n-1 exceeds the degree m");
  for (const auto* table : {&order1, &order2}) {
    for (const auto& p : *table) {
      for (const auto& [e, c] : p.terms()) {
        int deg = 0;
        for (const char* s : kComp) {
          int i = p.var_index(s);
          if (i < 0) continue;
          if (e[i] < 0) throw std::invalid_argument("negative power of a state variable");
          deg += e[i];
        }
        if (deg > m) throw std::invalid_argument("perturbation monomial of degree " + std::to_string(deg) + " exceeds m");
      }
    }
  }
}

Field3DSpec Field3DSpec::from_json(const json& j) {
  Field3DSpec s;
  s.name = j.value("name", "");
  s.m = j.at("m").get<int>();
  s.n = j.at("n").get<int>();
  s.params = j.value("params", std::vector<std::string>{});
  auto vars = field_vars(s);
  VarList vl = make_vars(vars);
  for (int order = 1; order <= 2; ++order) {
    auto& table = order == 1 ? s.order1 : s.order2;
    for (auto& p : table) p = MultiPoly(vl);
    const char* key = order == 1 ? "order1" : "order2";
    if (!j.contains(key)) continue;
    for (int c = 0; c < 3; ++c) {
      if (j.at(key).contains(kComp[c])) table[c] = poly_from_any(j.at(key).at(kComp[c]), vars);
    }
  }
  s.validate();
  return s;
}

json Field3DSpec::to_json() const {
  json j{{"name", name}, {"m", m}, {"n", n}, {"params", params}};
  for (int order = 1; order <= 2; ++order) {
    const auto& table = order == 1 ? order1 : order2;
    json t;
    for (int c = 0; c < 3; ++c) t[kComp[c]] = table[c].to_string();
    j[order == 1 ? "order1" : "order2"] = t;
  }
  return j;
}

Field3DSpec generic_family(int m, int n) {
  Field3DSpec s;
  s.name = "generic";
  s.m = m;
  s.n = n;
  const char* letters = "abc";
  std::vector<std::array<std::string, 4>> symbols;
  for (int c = 0; c < 3; ++c) {
    for (int d = 0; d <= m; ++d) {
      for (int jj = d; jj >= 0; --jj) {
        for (int kk = d - jj; kk >= 0; --kk) {
          int ll = d - jj - kk;
          std::string name = std::string(1, letters[c]) + std::to_string(jj) + std::to_string(kk) + std::to_string(ll);
          s.params.push_back(name);
          symbols.push_back({name, std::to_string(jj), std::to_string(kk), std::to_string(ll)});
        }
      }
    }
  }
  auto vars = field_vars(s);
  VarList vl = make_vars(vars);
  for (int c = 0; c < 3; ++c) {
    s.order1[c] = MultiPoly(vl);
    s.order2[c] = MultiPoly(vl);
  }
  for (const auto& sym : symbols) {
    int c = sym[0][0] - 'a';
    std::vector<int> e(vl->size(), 0);
    e[0] = std::stoi(sym[1]);
    e[1] = std::stoi(sym[2]);
    e[2] = std::stoi(sym[3]);
    e[3 + static_cast<int>(&sym - symbols.data())] = 1;
    s.order1[c] += MultiPoly::monomial(vl, e, ConstScalar(1));
  }
  return s;
}

StandardForm to_standard_form(const Field3DSpec& spec, int order) {
  spec.validate();
  if (order != 1 && order != 2) throw std::invalid_argument("averaging order must be 1 or 2");
  if (order == 2 && spec.n != 1) throw std::invalid_argument("second-order averaging is unsupported for n > 1");
  const int n = spec.n;
  std::vector<std::string> names = {"r", "w"};
  names.insert(names.end(), spec.params.begin(), spec.params.end());
  StandardForm sf;
  sf.n = n;
  sf.vars = make_vars(names);

  VarList polar = make_vars({"Cs", "Sn", "r"});
  MultiPoly cs = MultiPoly::variable(polar, "Cs");
  MultiPoly sn = MultiPoly::variable(polar, "Sn");
  MultiPoly r = MultiPoly::variable(polar, "r");
  std::map<std::string, MultiPoly> to_polar{
      {"x", r * cs}, {"y", r.pow(static_cast<unsigned>(n)) * sn}, {"z", MultiPoly::variable("w")}};
  auto pull = [&](const MultiPoly& p) { return p.substitute(to_polar); };

  const MultiPoly cs_odd = cs.pow(static_cast<unsigned>(2 * n - 1));
  const MultiPoly r_1mn = r_power(1 - n);
  auto radial = [&](const std::array<MultiPoly, 3>& X) { return cs_odd * pull(X[0]) + r_1mn * sn * pull(X[1]); };

  MultiPoly R1r = radial(spec.order1);
  MultiPoly R1w = pull(spec.order1[2]);
  sf.f1[0] = split_trig(r_1mn * R1r, sf.vars);
  sf.f1[1] = split_trig(r_1mn * R1w, sf.vars);
  if (order == 2) {
    // theta' = r^(n-1) (1 + eps Theta1 + ...), Theta1 = (Cs Q1 - n r^(n-1) Sn P1) / r^(2n-1)
    MultiPoly theta1 = (cs * pull(spec.order1[1]) - constant(n) * r_power(n - 1) * sn * pull(spec.order1[0])) *
                       r_power(1 - 2 * n);
    MultiPoly R2r = radial(spec.order2);
    MultiPoly R2w = pull(spec.order2[2]);
    sf.f2[0] = split_trig(r_1mn * (R2r - R1r * theta1), sf.vars);
    sf.f2[1] = split_trig(r_1mn * (R2w - R1w * theta1), sf.vars);
    sf.has_f2 = true;
  }
  return sf;
}

GuidingSystem first_averaged(const StandardForm& sf) {
  MomentTable moments(sf.n);
  const ConstScalar inv_T = moments.period().inverse();
  GuidingSystem g;
  std::array<MultiPoly, 2> out{MultiPoly(sf.vars), MultiPoly(sf.vars)};
  for (int c = 0; c < 2; ++c) {
    for (const auto& [key, coef] : sf.f1[c]) {
      ConstScalar I = moments.get(key.first, key.second);
      if (I.is_zero()) continue;
      out[c] += coef * (I * inv_T);
    }
    out[c] = out[c] * r_power(sf.n - 1).remap(sf.vars);
    int ir = out[c].var_index("r");
    if (!out[c].is_zero() && out[c].min_degree(ir) < 0) throw std::logic_error("averaged function is not polynomial in r");
  }
  g.g1 = out[0];
  g.g2 = out[1];
  g.order = 1;
  return g;
}

std::array<QuasiTrigSeries, 2> to_quasi_trig(const std::array<TrigSeries, 2>& f) {
  std::map<std::pair<int, int>, QuasiTrigSeries> cache;
  std::array<QuasiTrigSeries, 2> out;
  for (int c = 0; c < 2; ++c) {
    for (const auto& [key, coef] : f[c]) {
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, QuasiTrigSeries::cos_sin_power(key.second, key.first)).first;
      out[c] += it->second * coef;
    }
  }
  return out;
}

GuidingSystem second_melnikov(const StandardForm& sf) {
  if (sf.n != 1) throw std::invalid_argument("second-order averaging is unsupported for n > 1");
  GuidingSystem g1 = first_averaged(sf);
  if (!g1.g1.is_zero() || !g1.g2.is_zero()) throw FirstOrderObstruction(g1);
  auto F1 = to_quasi_trig(sf.f1);
  std::array<QuasiTrigSeries, 2> F2;
  if (sf.has_f2) F2 = to_quasi_trig(sf.f2);
  std::array<QuasiTrigSeries, 2> y1 = {F1[0].antiderivative(), F1[1].antiderivative()};
  const char* state[2] = {"r", "w"};
  const ConstScalar inv_T = (ConstScalar(2) * ConstScalar::pi()).inverse();
  GuidingSystem g;
  std::array<MultiPoly, 2> out;
  for (int c = 0; c < 2; ++c) {
    QuasiTrigSeries integrand = F2[c];
    for (int s = 0; s < 2; ++s) {
      QuasiTrigSeries dF = F1[c].map_coefficients([&](const MultiPoly& p) { return p.derivative(state[s]); });
      integrand += dF * y1[s];
    }
    out[c] = (integrand.integral_over_period() * inv_T).remap(sf.vars);
  }
  g.g1 = out[0];
  g.g2 = out[1];
  g.order = 2;
  return g;
}

RatPoly bell_polynomial(int p, int q, const std::vector<std::string>& xs) {
  if (q < 1 || q > p) throw std::invalid_argument("Bell polynomial needs 1 <= q <= p");
  const int len = p - q + 1;
  if (static_cast<int>(xs.size()) < len) throw std::invalid_argument("too few Bell polynomial symbols");
  VarList vars = make_vars(std::vector<std::string>(xs.begin(), xs.begin() + len));
  auto factorial = [](int k) {
    Integer f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::vector<RatPoly::Term> terms;
  std::vector<int> b(len, 0);
  // b_1 + 2 b_2 + ... = p, b_1 + b_2 + ... = q
  std::function<void(int, int, int)> rec = [&](int i, int rest_p, int rest_q) {
    if (i == len) {
      if (rest_p != 0 || rest_q != 0) return;
      Rational coef(factorial(p));
      for (int t = 0; t < len; ++t) {
        coef /= Rational(factorial(b[t]));
        coef /= pow(Rational(factorial(t + 1)), b[t]);
      }
      terms.emplace_back(b, coef);
      return;
    }
    for (int v = 0; v * (i + 1) <= rest_p && v <= rest_q; ++v) {
      b[i] = v;
      rec(i + 1, rest_p - v * (i + 1), rest_q - v);
    }
    b[i] = 0;
  };
  rec(0, p, q);
  return RatPoly(vars, std::move(terms));
}

int guiding_degree(int m, int n) { return m % 2 == 1 ? n * (m - 1) + 1 : n * m; }

bool admissible(int comp, int j, int k, int /*l*/) {
  switch (comp) {
    case 0: return (j + 1) % 2 == 0 && k % 2 == 0;
    case 1: return j % 2 == 0 && (k + 1) % 2 == 0;
    default: return j % 2 == 0 && k % 2 == 0;
  }
}

bool equal_up_to_positive_scale(const GuidingSystem& a, const GuidingSystem& b, Rational* factor) {
  const MultiPoly* ref = nullptr;
  const MultiPoly* cmp = nullptr;
  if (!b.g1.is_zero()) {
    ref = &b.g1;
    cmp = &a.g1;
  } else if (!b.g2.is_zero()) {
    ref = &b.g2;
    cmp = &a.g2;
  } else {
    return a.g1.is_zero() && a.g2.is_zero();
  }
  VarList u = union_vars(ref->vars(), cmp->vars());
  MultiPoly rr = ref->remap(u);
  MultiPoly cc = cmp->remap(u);
  const MultiPoly::Term* pick = nullptr;
  for (const auto& t : rr.terms()) {
    if (t.second.is_monomial()) {
      pick = &t;
      break;
    }
  }
  if (pick == nullptr) return false;
  ConstScalar ratio = cc.coeff(pick->first) / pick->second;
  if (!ratio.is_rational() || ratio.to_rational() <= 0) return false;
  if (a.g1 != b.g1 * ratio || a.g2 != b.g2 * ratio) return false;
  if (factor != nullptr) *factor = ratio.to_rational();
  return true;
}

GuidingSystem canonicalize(const GuidingSystem& g) {
  std::optional<ConstMonomial> shared;
  bool ok = true;
  for (const MultiPoly* p : {&g.g1, &g.g2}) {
    for (const auto& [e, c] : p->terms()) {
      for (const auto& [m, q] : c.terms()) {
        if (!shared) shared = m;
        ok = ok && *shared == m;
      }
    }
  }
  if (!ok || !shared || shared->is_one()) return g;
  ConstScalar inv(shared->pow(-1), 1);
  GuidingSystem out = g;
  out.g1 = g.g1 * inv;
  out.g2 = g.g2 * inv;
  out.scale = g.scale * inv;
  return out;
}

json GuidingSystem::to_json() const {
  return {{"order", order}, {"scale", scale.to_string()}, {"r", nhtori::to_json(g1)}, {"w", nhtori::to_json(g2)},
          {"display", {{"r", g1.to_string()}, {"w", g2.to_string()}}}};
}

GuidingSystem GuidingSystem::from_json(const json& j) {
  GuidingSystem g;
  g.order = j.value("order", 1);
  if (j.contains("scale")) g.scale = const_from_json(j.at("scale"));
  g.g1 = poly_from_any(j.at("r"));
  g.g2 = poly_from_any(j.at("w"));
  return g;
}

}  // namespace nhtori
