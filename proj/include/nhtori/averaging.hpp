#pragma once

#include "nhtori/poly.hpp"
#include "nhtori/quasi_trig.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nhtori {

/// X = X0 + eps X1 + eps^2 X2 with X0 = (-y, x^(2n-1), 0). The perturbation
/// components are polynomials in (x, y, z) and the declared parameters.
struct Field3DSpec {
  std::string name;
  int m = 2;
  int n = 1;
  std::vector<std::string> params;
  std::array<MultiPoly, 3> order1;
  std::array<MultiPoly, 3> order2;

  bool has_order2() const;
  /// Coefficient of x^j y^k z^l in component comp (0, 1, 2) of X_order.
  MultiPoly coefficient(int order, int comp, int j, int k, int l) const;
  /// Throws std::invalid_argument on degree or Andreev-number violations.
  void validate() const;

  static Field3DSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Generic family with symbols a_jkl, b_jkl, c_jkl (named "a100" etc.) for
/// every monomial of degree <= m.
Field3DSpec generic_family(int m, int n);

/// Trigonometric polynomial sum coef * Sn^k * Cs^j keyed by (k, j).
using TrigSeries = std::map<std::pair<int, int>, MultiPoly>;

struct StandardForm {
  int n = 1;
  VarList vars;  // r, w, parameters
  std::array<TrigSeries, 2> f1;
  std::array<TrigSeries, 2> f2;
  bool has_f2 = false;
};

struct GuidingSystem {
  MultiPoly g1;  // r'
  MultiPoly g2;  // w'
  int order = 1;
  /// Positive constant the averaged function was multiplied by.
  ConstScalar scale = ConstScalar(1);

  nlohmann::json to_json() const;
  static GuidingSystem from_json(const nlohmann::json& j);
};

/// Reduction to (dr/dtheta, dw/dtheta) = eps F1 + eps^2 F2 + O(eps^3). For
/// general n the r^(1-n) prefactor is included in the series.
StandardForm to_standard_form(const Field3DSpec& spec, int order);

/// g1 = f1 / T, multiplied by r^(n-1) so that it is polynomial.
GuidingSystem first_averaged(const StandardForm& sf);

/// The F1 / F2 series of an n = 1 standard form in Fourier form.
std::array<QuasiTrigSeries, 2> to_quasi_trig(const std::array<TrigSeries, 2>& f);

struct FirstOrderObstruction : std::runtime_error {
  GuidingSystem g1;
  explicit FirstOrderObstruction(GuidingSystem g)
      : std::runtime_error("first-order obstruction: the first averaged function does not vanish"), g1(std::move(g)) {}
};

/// g2 = f2 / T with f2 = int_0^T (F2 + D F1 y1), y1 = int_0^t F1. Requires
/// n = 1 and f1 == 0.
GuidingSystem second_melnikov(const StandardForm& sf);

/// Partial Bell polynomial B_{p,q}(x_1, ..., x_{p-q+1}) in the given symbols.
RatPoly bell_polynomial(int p, int q, const std::vector<std::string>& xs);

int guiding_degree(int m, int n);

/// True when a == c * b for a positive rational c (stored in factor).
bool equal_up_to_positive_scale(const GuidingSystem& a, const GuidingSystem& b, Rational* factor = nullptr);

/// Divides both components by one positive constant monomial when all
/// coefficients share it, so that moment constants cancel; the divisor is
/// folded into scale.
GuidingSystem canonicalize(const GuidingSystem& g);

/// Admissibility of a coefficient for the first averaged function
/// (comp 0: a_jkl, 1: b_jkl, 2: c_jkl).
bool admissible(int comp, int j, int k, int l);

}  // namespace nhtori
