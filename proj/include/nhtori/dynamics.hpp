#pragma once

#include "nhtori/averaging.hpp"
#include "nhtori/hopfprep.hpp"
#include "nhtori/poly.hpp"
#include "nhtori/poly_eval.hpp"

#include <json.hpp>

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nhtori {

class ODESystem {
 public:
  ODESystem() = default;
  /// rhs[i] is the derivative of state[i]; every other variable must be bound.
  ODESystem(std::vector<MultiPoly> rhs, std::vector<std::string> state,
            const std::map<std::string, double>& params = {});

  /// X0 + eps X1 (+ eps^2 X2) in (x, y, z).
  static ODESystem from_field(const Field3DSpec& spec, double eps, const std::map<std::string, double>& params);
  /// Guiding system (r', w') with the parameters bound.
  static ODESystem from_guiding(const GuidingSystem& g, const std::map<std::string, double>& params);
  /// Jordan system in (x, y); a symbolic tau is bound through params, and
  /// extra_trace adds t (x, y) to the right-hand side.
  static ODESystem from_jordan(const PlanarJordanSystem& sys, const std::map<std::string, double>& params,
                               double extra_trace = 0);

  std::size_t dim() const { return state_.size(); }
  const std::vector<std::string>& state() const { return state_; }
  const std::vector<MultiPoly>& exact_rhs() const { return exact_; }

  void eval(const double* x, double* dx) const;
  std::vector<double> eval(const std::vector<double>& x) const;
  /// Row-major dim x dim.
  void jacobian(const double* x, double* J) const;
  double divergence(const double* x) const;

 private:
  std::vector<std::string> state_;
  std::vector<MultiPoly> exact_;
  std::vector<CompiledPoly> f_;
  std::vector<CompiledPoly> df_;  // row-major
};

struct IntegrateOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  double h_init = 0;  // 0 picks a starting step
  double h_min = 1e-13;
  long max_steps = 50'000'000;
  /// Norm of the state beyond which the trajectory counts as escaped.
  double escape = 1e6;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
  long steps = 0;
  long rejected = 0;
  /// "ok", "blow-up" (step-size underflow), "escape" or "max-steps".
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Dormand-Prince 5(4) with error control max_i |e_i| / (atol + rtol |x_i|) <= 1.
Trajectory integrate(const ODESystem& sys, const std::vector<double>& x0, double t0, double t1,
                     const IntegrateOptions& opts = {}, bool keep_steps = false);

/// Hyperplane normal . x = offset, crossed with sign(direction) of d/dt (normal . x).
struct Section {
  std::vector<double> normal;
  double offset = 0;
  int direction = 1;

  static Section coordinate(std::size_t dim, std::size_t index, double value, int direction = 1);
  double value(const double* x) const;
  nlohmann::json to_json() const;
};

struct Crossing {
  double t = 0;
  std::vector<double> x;
  /// Variational data when requested: row-major Phi and the divergence integral.
  std::vector<double> phi;
  double div_integral = 0;
  long steps = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// First crossing of the section after t = 0 (a start point on the section is
/// not counted). With variational = true also integrates Phi' = Df Phi.
Crossing next_crossing(const ODESystem& sys, const std::vector<double>& x0, const Section& sec, double t_max,
                       const IntegrateOptions& opts = {}, bool variational = false);

struct LimitCycleOptions {
  double tol = 1e-10;
  double margin = 1e-4;
  double liouville_tol = 1e-6;
  int max_newton = 40;
  IntegrateOptions integ;
};

struct LimitCycle {
  std::vector<double> point;
  double period = 0;
  double multiplier = 0;  // nontrivial Floquet multiplier
  bool stable = false;
  double residual = 0;
  double monodromy_det = 0;
  double liouville = 0;  // exp of the divergence integral
  /// "cycle", "non-hyperbolic", "newton diverged" or "integration failed".
  std::string status;

  bool found() const { return status == "cycle"; }
  nlohmann::json to_json() const;
};

/// Newton on the return map of the section through seed normal to the flow.
LimitCycle find_limit_cycle(const ODESystem& sys, const std::vector<double>& seed, double seed_period,
                            const LimitCycleOptions& opts = {});

struct TorusOptions {
  /// Default: y = 0 crossed with y increasing; points recorded as (x, z).
  Section section = Section::coordinate(3, 1, 0.0, 1);
  std::array<std::size_t, 2> coords{0, 2};
  /// Seeds in section coordinates.
  std::vector<std::array<double, 2>> seeds;
  int transient = 50;
  int returns = 200;
  double fit_threshold = 1e-3;  // relative to the curve diameter
  double merge_distance = 1e-3;
  int harmonics = 16;
  /// Displacement scan along center + s * direction, one slow turn per sample.
  std::array<double, 2> center{0, 0};
  std::array<double, 2> direction{1, 0};
  std::vector<double> scan;
  /// Also iterate from every circle found by the scan (no transient).
  bool seed_scan_circles = true;
  int max_returns_per_turn = 200000;
  /// Upper bound on the flight time between two returns.
  double flight_time = 100;
  IntegrateOptions integ;
};

struct ClosedCurveFit {
  std::array<double, 2> center{0, 0};
  std::vector<double> coeffs;  // a0, a1, b1, a2, b2, ... of rho(phi)
  double residual = 0;         // rms / diameter
  double diameter = 0;
  bool monotone = false;
  bool closed = false;

  double radius_at(double phi) const;
  nlohmann::json to_json() const;
};

ClosedCurveFit fit_closed_curve(const std::vector<std::array<double, 2>>& pts, int harmonics, double threshold);

struct SeedOrbit {
  std::array<double, 2> seed{0, 0};
  std::vector<std::array<double, 2>> points;  // after the transient
  ClosedCurveFit fit;
  std::string status = "ok";  // or the integration failure
};

struct InvariantCircle {
  double s = 0;  // ray parameter of the displacement zero
  std::array<double, 2> point{0, 0};
  /// (s' - s*) / (s - s*) over one slow turn from the inner and outer sample.
  double contraction_inside = 0;
  double contraction_outside = 0;
  bool attracting = false;
  std::string source;  // "scan" or "seed"
  int returns_per_turn = 0;
};

struct TorusEvidence {
  Section section;
  std::array<std::size_t, 2> coords{0, 2};
  double eps = 0;
  std::vector<SeedOrbit> seeds;  // JSON keeps at most about 2000 points per seed
  std::vector<double> scan_s;
  std::vector<double> displacement;  // NaN where the turn was not completed
  std::vector<InvariantCircle> circles;
  int count = 0;
  std::string note;

  nlohmann::json to_json() const;
};

/// Section-return evidence of invariant circles of a 3D flow.
TorusEvidence torus_evidence(const ODESystem& field, double eps, const TorusOptions& opts);

/// Displacement over one turn around opts.center starting at center + s direction.
double slow_turn_displacement(const ODESystem& field, double s, const TorusOptions& opts,
                              std::vector<std::array<double, 2>>* orbit = nullptr, int* returns = nullptr);

struct SweepResult {
  std::vector<TorusEvidence> runs;
  int target = 0;
  /// eps values where the target count was observed.
  std::vector<double> hits;
  int best_count = 0;

  nlohmann::json to_json() const;
};

/// Logarithmic sweep from eps_hi down to eps_lo with `points` values.
std::vector<double> log_sweep(double eps_hi, double eps_lo, int points);

SweepResult eps_sweep(const Field3DSpec& spec, const std::map<std::string, double>& params,
                      const std::vector<double>& eps_values, const TorusOptions& opts, int target, int threads = 1);

std::string section_svg(const TorusEvidence& ev, int size = 600);
std::string section_csv(const TorusEvidence& ev);

}  // namespace nhtori
