#pragma once

#include "nhtori/poly.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nhtori {

/// Parses an expression such as "x^2 - 5*pi^2/(9*Gamma(3/4)^4)*l1*x^3".
///
/// Supported: + - * / ^, parentheses, integers, decimals, pi, Gamma(q),
/// sqrt(.). Division and negative powers need a monomial divisor; fractional
/// powers apply to constants only. With a non-empty `vars` the result is
/// expressed over that list and other identifiers are rejected; otherwise
/// variables are collected in order of appearance.
MultiPoly parse_poly(std::string_view text, const std::vector<std::string>& vars = {});
RatPoly parse_rat_poly(std::string_view text, const std::vector<std::string>& vars = {});
ConstScalar parse_const(std::string_view text);

}  // namespace nhtori
