#pragma once

#include "nhtori/interval.hpp"
#include "nhtori/poly.hpp"

#include <map>
#include <string>

namespace nhtori {

using IntervalBox = std::map<std::string, Interval>;

/// Enclosure of the range of p over the box. Non-rational coefficients are
/// enclosed at `bits` (default precision when 0); bits > 0 also rounds
/// intermediate results outward.
Interval interval_eval(const MultiPoly& p, const IntervalBox& box, unsigned bits = 0);
Interval interval_eval(const RatPoly& p, const IntervalBox& box, unsigned bits = 0);

/// Exact evaluation at a rational point (all variables bound).
Rational eval_rational(const RatPoly& p, const std::map<std::string, Rational>& point);

/// Floating-point evaluator for a polynomial with variables in a fixed
/// order; coefficients are rounded to long double once.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  /// `order` lists the evaluation slots; variables of p missing from it must
  /// be bound through `fixed`.
  CompiledPoly(const MultiPoly& p, const std::vector<std::string>& order,
               const std::map<std::string, long double>& fixed = {});

  long double operator()(const long double* x) const;
  double operator()(const double* x) const;
  bool is_zero() const { return terms_.empty(); }

 private:
  struct Term {
    long double coef;
    std::vector<std::pair<int, int>> powers;
  };
  std::vector<Term> terms_;
};

}  // namespace nhtori
