#pragma once

#include "nhtori/averaging.hpp"
#include "nhtori/poly.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace nhtori {

struct DegenerateNormalization : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parameters solved for when imposing the Hopf point. Each one must enter its
/// condition linearly with an invertible (monomial) coefficient.
struct NormalizeOptions {
  std::string root_param = "b010";      // r' vanishes at (rho, w0)
  std::string constant_param = "c000";  // w' vanishes at (rho, w0)
  std::string trace_param = "c001";     // trace = 2 tau
  std::string det_param = "c200";       // determinant = tau^2 + omega^2
  /// Parameter eliminated in favour of the symbol d = dg1/dw (rho, w0);
  /// needed when d is not a monomial.
  std::optional<std::string> d_param;
  std::string d_symbol = "d";
};

struct HopfNormalization {
  MultiPoly rho, w0, tau, omega;
  std::map<std::string, MultiPoly> substitutions;  // in solve order
  std::vector<std::string> solve_order;
  MultiPoly d;
  /// Positive constant c with Jacobian eigenvalues c (tau +- i omega) before
  /// the time rescaling; 1 when the parameters were solved for.
  Rational time_scale = 1;
  bool verified_only = false;

  nlohmann::json to_json() const;
};

/// Imposes an equilibrium at (rho, w0) with eigenvalues tau +- i omega. When
/// the guiding system contains none of the option parameters it is only
/// verified, after dividing time by the detected positive rational constant.
std::pair<GuidingSystem, HopfNormalization> normalize_at(const GuidingSystem& g, const MultiPoly& rho,
                                                         const MultiPoly& w0, const MultiPoly& tau,
                                                         const MultiPoly& omega, const NormalizeOptions& opts = {});

/// x' = tau x - omega y + P, y' = omega x + tau y + Q with P, Q at least
/// quadratic in (x, y).
struct PlanarJordanSystem {
  MultiPoly xdot, ydot;
  MultiPoly tau, omega;
  /// (r, w) = shift + basis * (x, y)
  std::array<MultiPoly, 2> shift;
  std::array<std::array<MultiPoly, 2>, 2> basis;

  /// Throws std::logic_error unless the linear part is the real Jordan block
  /// and there is no constant term.
  void check_linear_part() const;
  /// Parameters (all variables other than x, y).
  std::vector<std::string> params() const;
  /// Sets a symbolic tau to 0.
  PlanarJordanSystem at_tau_zero() const;

  nlohmann::json to_json() const;
  static PlanarJordanSystem from_json(const nlohmann::json& j);
};

/// Translation to (rho, w0) followed by the real Jordan conjugation. The
/// default basis is (Re v, Im v) for the eigenvector v of tau - i omega with
/// first component 1; `basis` overrides it as (r - rho, w - w0) = B (x, y).
PlanarJordanSystem jordan_form(const GuidingSystem& g, const HopfNormalization& norm,
                               const std::optional<std::array<std::array<MultiPoly, 2>, 2>>& basis = std::nullopt);

/// The 2x2 Jacobian of (g1, g2) with respect to (r, w) at (rho, w0).
std::array<std::array<MultiPoly, 2>, 2> jacobian_at(const GuidingSystem& g, const MultiPoly& rho, const MultiPoly& w0);

}  // namespace nhtori
