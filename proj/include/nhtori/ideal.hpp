#pragma once

#include "nhtori/interval.hpp"
#include "nhtori/poly.hpp"

#include <map>
#include <string>
#include <vector>

namespace nhtori {

enum class MonomialOrder { kLex, kGrLex, kGrevLex };

/// Monomial order over named variables; `priority` lists variables from most
/// to least significant. Variables of the operands not listed follow in
/// their own order.
struct OrderSpec {
  MonomialOrder kind = MonomialOrder::kGrLex;
  std::vector<std::string> priority;
};

struct DivisionResult {
  RatPoly remainder;
  std::vector<RatPoly> quotients;
};

/// Multivariate division: p = sum(quotients[i] * gens[i]) + remainder with no
/// remainder term divisible by a leading term. Negative exponents (Laurent
/// units such as 1/omega) are cleared by a monomial factor before dividing;
/// the returned identity holds exactly in the Laurent ring.
DivisionResult reduce_mod_ideal(const RatPoly& p, const std::vector<RatPoly>& gens, const OrderSpec& order = {});

/// Monic gcd of two polynomials in the single variable var.
RatPoly univariate_gcd(RatPoly a, RatPoly b, const std::string& var);

/// True when a and b differ by a nonzero rational factor; the factor a/b is
/// stored in unit when provided.
bool equal_up_to_unit(const RatPoly& a, const RatPoly& b, Rational* unit = nullptr);

/// Exact rank over Q of d(fs)/d(vars) at a rational point. Throws
/// std::domain_error when an entry is not rational at the point.
int rank_at(const std::vector<MultiPoly>& fs, const std::map<std::string, Rational>& point,
            const std::vector<std::string>& vars);
int rank_at(const std::vector<RatPoly>& fs, const std::map<std::string, Rational>& point,
            const std::vector<std::string>& vars);

/// Exact rank of a rational matrix (row-major rows).
int rational_rank(std::vector<std::vector<Rational>> rows);

/// Certified lower bound on the rank of every matrix in the enclosure.
int interval_rank_lower_bound(const IntervalMatrix& m);

}  // namespace nhtori
