#pragma once

#include "nhtori/poly.hpp"

#include <json.hpp>

namespace nhtori {

/// Canonical form {"vars":[...], "terms":[{"exp":[...], "coef":{"rat":"p/q","mono":{"pi":"3/2"}}}]}.
/// A coefficient that is a sum of several constant monomials is written as
/// several entries sharing the same exponent.
nlohmann::json to_json(const MultiPoly& p);
nlohmann::json to_json(const RatPoly& p);
MultiPoly multipoly_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConstScalar& c);
ConstScalar const_from_json(const nlohmann::json& j);

/// Accepts either the canonical object or an expression string.
MultiPoly poly_from_any(const nlohmann::json& j, const std::vector<std::string>& vars = {});

}  // namespace nhtori
