#pragma once

#include "nhtori/hopfprep.hpp"
#include "nhtori/poly.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace nhtori {

/// Drops parameter monomials of total degree above max_degree at every
/// product. A negative max_degree means exact arithmetic.
struct TruncationPolicy {
  int max_degree = -1;
  /// Variables counted in the degree; empty means every parameter.
  std::vector<std::string> params;

  bool exact() const { return max_degree < 0; }
};

struct FocusQuantitySequence {
  std::vector<RatPoly> L;  // L[0] is L_1
  TruncationPolicy policy;
  /// Positive rational c with L_i = c * (natural output of the recursion).
  Rational unit = 1;

  nlohmann::json to_json() const;
  static FocusQuantitySequence from_json(const nlohmann::json& j);
};

/// L_1..L_k of x' = -omega y + P, y' = omega x + Q (tau = 0). The convention
/// is H = x^2 + y^2 + h.o.t. with dH/dt = sum_i L_i x^(2i+2) on the
/// reduced monomial set; omega must be an invertible monomial.
FocusQuantitySequence lyapunov_coefficients(const PlanarJordanSystem& sys, int k, const TruncationPolicy& policy = {});

struct ReversibilityWitness {
  bool reversible = false;
  /// "x" for (x, y, t) -> (-x, y, -t), "y" for (x, y, t) -> (x, -y, -t).
  std::string axis;
};

ReversibilityWitness is_time_reversible(const PlanarJordanSystem& sys);

/// Degree-d homogeneous term of the Taylor expansion of L about base, in the
/// displacement variables (named like the originals).
RatPoly homogeneous_part(const RatPoly& L, const std::map<std::string, Rational>& base, int d,
                         const std::vector<std::string>& params = {});

/// Solves fs = 0 for the named variables as power series in the remaining
/// parameters, correct through total degree `degree`. Requires fs(0) = 0 and
/// an invertible linear coefficient matrix in `solve_for`.
std::map<std::string, RatPoly> solve_leading(const std::vector<RatPoly>& fs, const std::vector<std::string>& solve_for,
                                             int degree);

/// Substitutes and truncates to the given total degree in the remaining
/// parameters.
RatPoly substitute_truncated(const RatPoly& p, const std::map<std::string, RatPoly>& values, int degree);

struct UnfoldOptions {
  double ratio = 1e-2;
  /// Parameters perturbed to move L_1..L_{k-1}; chosen automatically when empty.
  std::vector<std::string> vary;
  /// Absolute tolerance for L_i(mu*) = 0 when mu* is not exact; 0 demands exact zeros.
  double zero_tolerance = 0;
};

struct UnfoldStep {
  std::map<std::string, double> params;
  double tau = 0;
  /// Targets for L_{k-1}, ..., L_1, tau (0 for levels not yet perturbed).
  std::vector<double> targets;
  std::string pattern;
  int expected_cycles = 0;

  nlohmann::json to_json() const;
};

/// Nested degenerate-Hopf unfolding from a point with L_1..L_{k-1} = 0 and
/// L_k != 0: step j perturbs one more level with the sign opposite to the
/// level above and magnitude |L_k| ratio^j.
std::vector<UnfoldStep> unfold_schedule(const std::vector<RatPoly>& Ls, const std::map<std::string, Rational>& mu_star,
                                        int k, const UnfoldOptions& opts = {});

/// As above for a point known only approximately.
std::vector<UnfoldStep> unfold_schedule(const std::vector<RatPoly>& Ls, const std::map<std::string, double>& mu_star,
                                        int k, const UnfoldOptions& opts = {});

double eval_double(const RatPoly& p, const std::map<std::string, double>& values);

}  // namespace nhtori
