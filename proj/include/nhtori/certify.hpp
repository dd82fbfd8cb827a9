#pragma once

#include "nhtori/interval.hpp"
#include "nhtori/poly.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nhtori {

struct Box {
  std::vector<Rational> center;
  std::vector<Rational> radius;

  static Box cube(std::vector<Rational> center, const Rational& r);
  void validate() const;
  nlohmann::json to_json() const;
};

/// mu = center + A u; the preconditioned system is g(u) = M f(mu).
struct AffineMap {
  std::vector<std::string> vars;   // original variables (mu)
  std::vector<std::string> uvars;  // new variables (u)
  std::vector<Rational> center;
  std::vector<std::vector<Rational>> A;
  std::vector<std::vector<Rational>> M;

  nlohmann::json to_json() const;
};

struct Preconditioned {
  std::vector<RatPoly> g;  // expanded in the u variables
  AffineMap map;

  /// Expands h(center + A u) in the u variables (no left factor).
  RatPoly pull_back(const RatPoly& h) const;
};

struct PreconditionOptions {
  /// Significant decimal digits kept in the entries of A.
  int digits = 30;
  /// Left factor M: identity, or the exact inverse of the rounded D f(mu) A.
  bool left_identity = true;
};

/// Translates approx_root to the origin and right-multiplies by a rational
/// approximation of the inverse Jacobian so that Dg(0) is near the identity.
Preconditioned affine_precondition(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                                   const std::vector<Rational>& approx_root, const PreconditionOptions& opts = {});

struct FaceEnclosure {
  int index = 0;  // function and coordinate
  int side = 0;   // +1 or -1
  Interval value;
};

struct PMCertificate {
  std::vector<std::string> vars;
  Box box;
  std::vector<FaceEnclosure> faces;
  unsigned bits = 0;
  std::string verdict = "unknown";  // "certified" or "unknown"

  bool certified() const { return verdict == "certified"; }
  nlohmann::json to_json() const;
};

/// Poincare-Miranda sign test: f_i on the face u_i = c_i + r_i and on
/// u_i = c_i - r_i must have strictly opposite signs for every i. `bits`
/// rounds intermediate interval arithmetic outward (0 = exact rationals).
PMCertificate pm_check(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars, const Box& box,
                       unsigned bits = 0);

struct GerschgorinCertificate {
  IntervalMatrix matrix;
  std::vector<Interval> diagonal;
  /// Upper bounds of sum_{j != i} |a_ij|.
  std::vector<Rational> radius;
  std::string verdict = "unknown";  // "nonsingular" or "unknown"

  bool nonsingular() const { return verdict == "nonsingular"; }
  Rational max_radius() const;
  nlohmann::json to_json() const;
};

GerschgorinCertificate gerschgorin_regular(const IntervalMatrix& J);

/// Enclosure of the Jacobian of fs over the box.
IntervalMatrix jacobian_enclosure(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars, const Box& box,
                                  unsigned bits = 0);

struct SimpleZeroCertificate {
  Preconditioned system;
  PMCertificate pm;
  /// Jacobian of the preconditioned system over the whole box (decides the verdict).
  GerschgorinCertificate gerschgorin;
  /// Same test on the Jacobian at the box center, for reporting.
  GerschgorinCertificate gerschgorin_center;
  /// Enclosures over the box of the extra functions, after pull-back.
  std::vector<Interval> extra;
  std::string verdict = "not certified";

  bool certified() const { return verdict == "simple zero certified"; }
  nlohmann::json to_json() const;
};

struct CertifyOptions {
  PreconditionOptions precondition;
  unsigned bits = 0;
  /// Functions to enclose over the box (e.g. the next focus quantity).
  std::vector<RatPoly> extra;
  /// Divide each extra function by its value at approx_root (rounded).
  bool normalize_extra = true;
};

SimpleZeroCertificate certify_simple_zero(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                                          const std::vector<Rational>& approx_root, const Rational& radius,
                                          const CertifyOptions& opts = {});

/// Newton iteration in exact arithmetic with the iterate rounded to `digits`
/// decimals after each step.
std::vector<Rational> newton_refine(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                                    std::vector<Rational> seed, int iterations = 30, int digits = 40);

}  // namespace nhtori
