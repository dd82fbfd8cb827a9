#include "nhtori/poly_json.hpp"

#include "nhtori/poly_parse.hpp"

#include <stdexcept>

namespace nhtori {

using nlohmann::json;

namespace {

json mono_json(const ConstMonomial& m) {
  json mono = json::object();
  for (int b = 0; b < ConstMonomial::kBases; ++b) {
    if (m.exp[b] != 0) mono[ConstMonomial::key(b)] = nhtori::to_string(m.exp[b]);
  }
  return mono;
}

ConstScalar term_from_json(const json& coef) {
  ConstMonomial m;
  if (coef.contains("mono")) {
    for (const auto& [key, value] : coef.at("mono").items()) {
      int base = -1;
      for (int b = 0; b < ConstMonomial::kBases; ++b) {
        if (key == ConstMonomial::key(b)) base = b;
      }
      if (base < 0) throw std::invalid_argument("unknown constant base: " + key);
      m.exp[base] = parse_rational(value.get<std::string>());
    }
  }
  return ConstScalar(m, parse_rational(coef.at("rat").get<std::string>()));
}

}  // namespace

json to_json(const ConstScalar& c) {
  json arr = json::array();
  for (const auto& [m, q] : c.terms()) arr.push_back({{"rat", nhtori::to_string(q)}, {"mono", mono_json(m)}});
  if (arr.size() == 1) return arr[0];
  return arr;
}

ConstScalar const_from_json(const json& j) {
  if (j.is_string()) return parse_const(j.get<std::string>());
  if (j.is_number_integer()) return ConstScalar(Rational(j.get<long>()));
  if (j.is_array()) {
    ConstScalar sum;
    for (const auto& t : j) sum += term_from_json(t);
    return sum;
  }
  return term_from_json(j);
}

json to_json(const MultiPoly& p) {
  json terms = json::array();
  for (const auto& [e, c] : p.terms()) {
    for (const auto& [m, q] : c.terms()) {
      terms.push_back({{"exp", e}, {"coef", {{"rat", nhtori::to_string(q)}, {"mono", mono_json(m)}}}});
    }
  }
  return {{"vars", *p.vars()}, {"terms", terms}};
}

json to_json(const RatPoly& p) { return to_json(to_multi(p)); }

MultiPoly multipoly_from_json(const json& j) {
  VarList vars = make_vars(j.at("vars").get<std::vector<std::string>>());
  std::vector<MultiPoly::Term> terms;
  for (const auto& t : j.at("terms")) {
    auto e = t.at("exp").get<std::vector<int>>();
    if (e.size() != vars->size()) throw std::invalid_argument("exponent length does not match vars");
    terms.emplace_back(std::move(e), term_from_json(t.at("coef")));
  }
  return MultiPoly(vars, std::move(terms));
}

MultiPoly poly_from_any(const json& j, const std::vector<std::string>& vars) {
  if (j.is_string()) return parse_poly(j.get<std::string>(), vars);
  if (j.is_number_integer()) return MultiPoly::constant(ConstScalar(Rational(j.get<long>())));
  MultiPoly p = multipoly_from_json(j);
  if (vars.empty()) return p;
  return p.remap(make_vars(vars));
}

}  // namespace nhtori
