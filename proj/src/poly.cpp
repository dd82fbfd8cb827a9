#include "nhtori/poly.hpp"

namespace nhtori {

VarList make_vars(std::vector<std::string> names) {
  return std::make_shared<const std::vector<std::string>>(std::move(names));
}

VarList empty_vars() {
  static const VarList empty = make_vars({});
  return empty;
}

bool same_vars(const VarList& a, const VarList& b) { return a == b || *a == *b; }

VarList union_vars(const VarList& a, const VarList& b) {
  if (same_vars(a, b) || b->empty()) return a;
  if (a->empty()) return b;
  std::vector<std::string> out = *a;
  bool grew = false;
  for (const auto& name : *b) {
    if (std::find(out.begin(), out.end(), name) == out.end()) {
      out.push_back(name);
      grew = true;
    }
  }
  return grew ? make_vars(std::move(out)) : a;
}

MultiPoly to_multi(const RatPoly& p) {
  return p.map_coeffs<ConstScalar>([](const Rational& c) { return ConstScalar(c); });
}

RatPoly to_rational_poly(const MultiPoly& p) {
  return p.map_coeffs<Rational>([](const ConstScalar& c) { return c.to_rational(); });
}

bool is_rational_poly(const MultiPoly& p) {
  return std::all_of(p.terms().begin(), p.terms().end(), [](const auto& t) { return t.second.is_rational(); });
}

}  // namespace nhtori
