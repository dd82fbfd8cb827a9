#include "nhtori/dynamics.hpp"

#include "nhtori/poly_parse.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace nhtori {

using nlohmann::json;

ODESystem::ODESystem(std::vector<MultiPoly> rhs, std::vector<std::string> state,
                     const std::map<std::string, double>& params)
    : state_(std::move(state)), exact_(std::move(rhs)) {
  if (exact_.size() != state_.size()) throw std::invalid_argument("ODESystem: rhs and state sizes differ");
  std::map<std::string, long double> fixed;
  for (const auto& [k, v] : params) fixed[k] = v;
  for (const auto& s : state_) fixed.erase(s);
  const std::size_t n = state_.size();
  for (const auto& p : exact_) f_.emplace_back(p, state_, fixed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) df_.emplace_back(exact_[i].derivative(state_[j]), state_, fixed);
}

ODESystem ODESystem::from_field(const Field3DSpec& spec, double eps, const std::map<std::string, double>& params) {
  std::array<MultiPoly, 3> x0{parse_poly("-y"), parse_poly("x^" + std::to_string(2 * spec.n - 1)), parse_poly("0")};
  std::vector<MultiPoly> rhs;
  const MultiPoly e = MultiPoly::constant(ConstScalar(rational_from_double(eps)));
  for (int i = 0; i < 3; ++i) {
    MultiPoly c = x0[i] + e * spec.order1[i];
    if (spec.has_order2()) c += e * e * spec.order2[i];
    rhs.push_back(c);
  }
  return ODESystem(std::move(rhs), {"x", "y", "z"}, params);
}

ODESystem ODESystem::from_guiding(const GuidingSystem& g, const std::map<std::string, double>& params) {
  return ODESystem({g.g1, g.g2}, {"r", "w"}, params);
}

ODESystem ODESystem::from_jordan(const PlanarJordanSystem& sys, const std::map<std::string, double>& params,
                                 double extra_trace) {
  const MultiPoly t = MultiPoly::constant(ConstScalar(rational_from_double(extra_trace)));
  return ODESystem({sys.xdot + t * parse_poly("x"), sys.ydot + t * parse_poly("y")}, {"x", "y"}, params);
}

void ODESystem::eval(const double* x, double* dx) const {
  for (std::size_t i = 0; i < f_.size(); ++i) dx[i] = f_[i](x);
}

std::vector<double> ODESystem::eval(const std::vector<double>& x) const {
  std::vector<double> dx(dim());
  eval(x.data(), dx.data());
  return dx;
}

void ODESystem::jacobian(const double* x, double* J) const {
  for (std::size_t i = 0; i < df_.size(); ++i) J[i] = df_[i](x);
}

double ODESystem::divergence(const double* x) const {
  double s = 0;
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) s += df_[i * n + i](x);
  return s;
}

namespace {

using Rhs = std::function<void(const double*, double*)>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

class Dopri5 {
 public:
  Dopri5(Rhs f, std::size_t n, const IntegrateOptions& opts)
      : f_(std::move(f)), n_(n), o_(opts), y_(n), y1_(n), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n),
        k7_(n), tmp_(n), r1_(n), r2_(n), r3_(n), r4_(n), r5_(n) {}

  void reset(double t, const std::vector<double>& y) {
    t_ = t;
    y_ = y;
    f_(y_.data(), k1_.data());
    h_ = o_.h_init > 0 ? o_.h_init : initial_step();
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const std::vector<double>& y() const { return y_; }
  long steps() const { return steps_; }
  long rejected() const { return rejected_; }
  const std::string& status() const { return status_; }

  /// One accepted step that does not pass t_end.
  bool step(double t_end) {
    for (;;) {
      if (steps_ + rejected_ >= o_.max_steps) return fail("max-steps");
      double h = std::min(h_, t_end - t_);
      if (h < o_.h_min && t_end - t_ > o_.h_min) return fail("blow-up");
      stages(h);
      double err = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        const double sc = o_.atol + o_.rtol * std::max(std::abs(y_[i]), std::abs(y1_[i]));
        err += (e / sc) * (e / sc);
      }
      err = std::sqrt(err / static_cast<double>(n_));
      if (!std::isfinite(err)) {
        h_ = h * 0.1;
        ++rejected_;
        continue;
      }
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-30), -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        for (std::size_t i = 0; i < n_; ++i) {
          const double dy = y1_[i] - y_[i];
          r1_[i] = y_[i];
          r2_[i] = dy;
          r3_[i] = h * k1_[i] - dy;
          r4_[i] = dy - h * k7_[i] - r3_[i];
          r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
        t_prev_ = t_;
        h_last_ = h;
        t_ += h;
        y_.swap(y1_);
        k1_.swap(k7_);
        ++steps_;
        double norm = 0;
        for (double v : y_) norm = std::max(norm, std::abs(v));
        if (!(norm < o_.escape)) return fail("escape");
        h_ = h * fac;
        return true;
      }
      ++rejected_;
      h_ = h * std::min(1.0, fac);
    }
  }

  /// Dense output inside the last accepted step.
  void dense(double t, double* out) const {
    const double th = (t - t_prev_) / h_last_, th1 = 1 - th;
    for (std::size_t i = 0; i < n_; ++i)
      out[i] = r1_[i] + th * (r2_[i] + th1 * (r3_[i] + th * (r4_[i] + th1 * r5_[i])));
  }

 private:
  bool fail(const char* s) {
    status_ = s;
    return false;
  }

  double initial_step() {
    double d0 = 0, dd1 = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = o_.atol + o_.rtol * std::abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      dd1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / n_);
    dd1 = std::sqrt(dd1 / n_);
    double h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    return std::min(h, 0.1);
  }

  void stages(double h) {
    auto comb = [&](std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
      for (std::size_t i = 0; i < n_; ++i) {
        double s = 0;
        for (const auto& [a, k] : terms) s += a * (*k)[i];
        tmp_[i] = y_[i] + h * s;
      }
    };
    comb({{a21, &k1_}});
    f_(tmp_.data(), k2_.data());
    comb({{a31, &k1_}, {a32, &k2_}});
    f_(tmp_.data(), k3_.data());
    comb({{a41, &k1_}, {a42, &k2_}, {a43, &k3_}});
    f_(tmp_.data(), k4_.data());
    comb({{a51, &k1_}, {a52, &k2_}, {a53, &k3_}, {a54, &k4_}});
    f_(tmp_.data(), k5_.data());
    comb({{a61, &k1_}, {a62, &k2_}, {a63, &k3_}, {a64, &k4_}, {a65, &k5_}});
    f_(tmp_.data(), k6_.data());
    for (std::size_t i = 0; i < n_; ++i)
      y1_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
    f_(y1_.data(), k7_.data());
  }

  Rhs f_;
  std::size_t n_;
  IntegrateOptions o_;
  double t_ = 0, t_prev_ = 0, h_ = 0, h_last_ = 1;
  std::vector<double> y_, y1_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, r1_, r2_, r3_, r4_, r5_;
  long steps_ = 0, rejected_ = 0;
  std::string status_ = "ok";
};

Rhs plain_rhs(const ODESystem& sys) {
  return [&sys](const double* x, double* dx) { sys.eval(x, dx); };
}

// State (x, Phi row-major, int div).
Rhs variational_rhs(const ODESystem& sys) {
  const std::size_t n = sys.dim();
  return [&sys, n, J = std::vector<double>(n * n)](const double* y, double* dy) mutable {
    sys.eval(y, dy);
    sys.jacobian(y, J.data());
    const double* phi = y + n;
    double* dphi = dy + n;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t k = 0; k < n; ++k) s += J[i * n + k] * phi[k * n + j];
        dphi[i * n + j] = s;
      }
    double div = 0;
    for (std::size_t i = 0; i < n; ++i) div += J[i * n + i];
    dy[n + n * n] = div;
  };
}

}  // namespace

Trajectory integrate(const ODESystem& sys, const std::vector<double>& x0, double t0, double t1,
                     const IntegrateOptions& opts, bool keep_steps) {
  if (!(opts.rtol > 0) || !(opts.atol > 0)) throw std::invalid_argument("integrate: tolerances must be positive");
  if (x0.size() != sys.dim()) throw std::invalid_argument("integrate: initial point has the wrong dimension");
  if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 < t0");
  Trajectory tr;
  tr.t.push_back(t0);
  tr.x.push_back(x0);
  if (t1 == t0) return tr;
  Dopri5 rk(plain_rhs(sys), sys.dim(), opts);
  rk.reset(t0, x0);
  while (rk.t() < t1) {
    if (!rk.step(t1)) {
      tr.status = rk.status();
      break;
    }
    if (keep_steps) {
      tr.t.push_back(rk.t());
      tr.x.push_back(rk.y());
    }
  }
  if (!keep_steps || !tr.ok()) {
    tr.t.push_back(rk.t());
    tr.x.push_back(rk.y());
  }
  tr.steps = rk.steps();
  tr.rejected = rk.rejected();
  return tr;
}

Section Section::coordinate(std::size_t dim, std::size_t index, double value, int direction) {
  Section s;
  s.normal.assign(dim, 0.0);
  s.normal.at(index) = 1.0;
  s.offset = value;
  s.direction = direction;
  return s;
}

double Section::value(const double* x) const {
  double s = -offset;
  for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * x[i];
  return s;
}

json Section::to_json() const { return {{"normal", normal}, {"offset", offset}, {"direction", direction}}; }

Crossing next_crossing(const ODESystem& sys, const std::vector<double>& x0, const Section& sec, double t_max,
                       const IntegrateOptions& opts, bool variational) {
  const std::size_t n = sys.dim();
  if (sec.normal.size() != n) throw std::invalid_argument("next_crossing: section dimension mismatch");
  const std::size_t m = variational ? n + n * n + 1 : n;
  std::vector<double> y0(m, 0.0);
  std::copy(x0.begin(), x0.end(), y0.begin());
  if (variational)
    for (std::size_t i = 0; i < n; ++i) y0[n + i * n + i] = 1.0;
  Dopri5 rk(variational ? variational_rhs(sys) : plain_rhs(sys), m, opts);
  rk.reset(0.0, y0);
  Crossing c;
  auto crossed = [&](double a, double b) {
    if (sec.direction > 0) return a < 0 && b >= 0;
    if (sec.direction < 0) return a > 0 && b <= 0;
    return (a < 0 && b >= 0) || (a > 0 && b <= 0);
  };
  double g_prev = sec.value(y0.data());
  double scale = 1;
  for (std::size_t i = 0; i < n; ++i) scale += std::abs(sec.normal[i] * x0[i]);
  if (std::abs(g_prev) < 1e-12 * scale) g_prev = 0;  // start on the section
  std::vector<double> buf(m);
  while (rk.t() < t_max) {
    if (!rk.step(t_max)) {
      c.status = rk.status();
      c.steps = rk.steps();
      return c;
    }
    const double g = sec.value(rk.y().data());
    if (crossed(g_prev, g)) {
      // Illinois iteration on the dense output.
      double ta = rk.t_prev(), tb = rk.t(), ga = g_prev, gb = g;
      int side = 0;
      for (int it = 0; it < 100 && tb - ta > 1e-15 * std::max(1.0, std::abs(tb)); ++it) {
        double tc = (ta * gb - tb * ga) / (gb - ga);
        if (!(tc > ta && tc < tb)) tc = 0.5 * (ta + tb);
        rk.dense(tc, buf.data());
        const double gc = sec.value(buf.data());
        if (gc == 0) {
          ta = tb = tc;
          break;
        }
        if ((gc < 0) == (ga < 0)) {
          ta = tc;
          ga = gc;
          if (side == -1) gb *= 0.5;
          side = -1;
        } else {
          tb = tc;
          gb = gc;
          if (side == 1) ga *= 0.5;
          side = 1;
        }
      }
      c.t = std::abs(ga) < std::abs(gb) ? ta : tb;
      rk.dense(c.t, buf.data());
      c.x.assign(buf.begin(), buf.begin() + static_cast<long>(n));
      if (variational) {
        c.phi.assign(buf.begin() + static_cast<long>(n), buf.begin() + static_cast<long>(n + n * n));
        c.div_integral = buf[n + n * n];
      }
      c.steps = rk.steps();
      return c;
    }
    g_prev = g;
  }
  c.status = "no crossing";
  c.steps = rk.steps();
  return c;
}

json LimitCycle::to_json() const {
  return {{"status", status},       {"point", point},           {"period", period},
          {"multiplier", multiplier}, {"stable", stable},       {"residual", residual},
          {"monodromy_det", monodromy_det}, {"liouville", liouville}};
}

LimitCycle find_limit_cycle(const ODESystem& sys, const std::vector<double>& seed, double seed_period,
                            const LimitCycleOptions& opts) {
  if (sys.dim() != 2) throw std::invalid_argument("find_limit_cycle: planar systems only");
  if (!(seed_period > 0)) throw std::invalid_argument("find_limit_cycle: seed period must be positive");
  LimitCycle lc;
  const std::vector<double> f0 = sys.eval(seed);
  const double nf = std::hypot(f0[0], f0[1]);
  if (nf == 0) throw std::invalid_argument("find_limit_cycle: seed is an equilibrium");
  Section sec;
  sec.normal = {f0[0] / nf, f0[1] / nf};
  sec.offset = sec.normal[0] * seed[0] + sec.normal[1] * seed[1];
  sec.direction = 1;
  const double tx = -sec.normal[1], ty = sec.normal[0];

  struct Eval {
    double P = 0, dP = 0;
    Crossing c;
  };
  auto eval = [&](double s) -> Eval {
    Eval e;
    std::vector<double> x0{seed[0] + s * tx, seed[1] + s * ty};
    e.c = next_crossing(sys, x0, sec, 3 * seed_period, opts.integ, true);
    if (!e.c.ok()) return e;
    const double* phi = e.c.phi.data();
    const std::vector<double> fT = sys.eval(e.c.x);
    const double nfT = sec.normal[0] * fT[0] + sec.normal[1] * fT[1];
    // d x_T / d s including the change of return time.
    const double v0 = phi[0] * tx + phi[1] * ty, v1 = phi[2] * tx + phi[3] * ty;
    const double nv = sec.normal[0] * v0 + sec.normal[1] * v1;
    const double w0 = v0 - fT[0] * nv / nfT, w1 = v1 - fT[1] * nv / nfT;
    e.P = tx * (e.c.x[0] - seed[0]) + ty * (e.c.x[1] - seed[1]);
    e.dP = tx * w0 + ty * w1;
    return e;
  };

  double s = 0;
  Eval cur = eval(s);
  if (!cur.c.ok()) {
    lc.status = "integration failed";
    return lc;
  }
  for (int it = 0;; ++it) {
    const double res = cur.P - s;
    if (std::abs(res) < opts.tol) break;
    if (it >= opts.max_newton) {
      lc.status = "newton diverged";
      lc.residual = std::abs(res);
      return lc;
    }
    double step = -res / (cur.dP - 1);
    Eval next;
    double snext = s;
    bool improved = false;
    for (int k = 0; k < 20; ++k) {
      snext = s + step;
      next = eval(snext);
      if (next.c.ok() && std::abs(next.P - snext) < std::abs(res)) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      lc.status = "newton diverged";
      lc.residual = std::abs(res);
      return lc;
    }
    s = snext;
    cur = next;
  }
  lc.point = {seed[0] + s * tx, seed[1] + s * ty};
  lc.period = cur.c.t;
  lc.residual = std::abs(cur.P - s);
  lc.multiplier = cur.dP;
  const auto& phi = cur.c.phi;
  lc.monodromy_det = phi[0] * phi[3] - phi[1] * phi[2];
  lc.liouville = std::exp(cur.c.div_integral);
  lc.stable = std::abs(lc.multiplier) < 1;
  if (std::abs(lc.monodromy_det - lc.liouville) > opts.liouville_tol * std::max(1.0, std::abs(lc.liouville)))
    lc.status = "liouville mismatch";
  else if (std::abs(lc.multiplier - 1) < opts.margin)
    lc.status = "non-hyperbolic";
  else
    lc.status = "cycle";
  return lc;
}

// ----- section evidence -----

double ClosedCurveFit::radius_at(double phi) const {
  if (coeffs.empty()) return 0;
  double r = coeffs[0];
  for (std::size_t k = 1; 2 * k < coeffs.size() + 1; ++k)
    r += coeffs[2 * k - 1] * std::cos(k * phi) + coeffs[2 * k] * std::sin(k * phi);
  return r;
}

json ClosedCurveFit::to_json() const {
  return {{"center", center}, {"coeffs", coeffs},   {"residual", residual},
          {"diameter", diameter}, {"monotone", monotone}, {"closed", closed}};
}

ClosedCurveFit fit_closed_curve(const std::vector<std::array<double, 2>>& pts, int harmonics, double threshold) {
  ClosedCurveFit fit;
  const std::size_t N = pts.size();
  if (N < 8) return fit;
  // Algebraic circle fit for the center.
  Eigen::MatrixXd A(N, 3);
  Eigen::VectorXd b(N);
  for (std::size_t i = 0; i < N; ++i) {
    A(i, 0) = pts[i][0];
    A(i, 1) = pts[i][1];
    A(i, 2) = 1;
    b(i) = pts[i][0] * pts[i][0] + pts[i][1] * pts[i][1];
  }
  Eigen::Vector3d sol = A.colPivHouseholderQr().solve(b);
  fit.center = {sol(0) / 2, sol(1) / 2};
  if (!std::isfinite(fit.center[0]) || !std::isfinite(fit.center[1])) return fit;

  std::vector<double> phi(N), rho(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double dx = pts[i][0] - fit.center[0], dy = pts[i][1] - fit.center[1];
    phi[i] = std::atan2(dy, dx);
    rho[i] = std::hypot(dx, dy);
  }
  int sign = 0;
  double total = 0;
  fit.monotone = true;
  for (std::size_t i = 1; i < N; ++i) {
    double d = std::remainder(phi[i] - phi[i - 1], 2 * M_PI);
    const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sg == 0 || (sign != 0 && sg != sign)) fit.monotone = false;
    if (sign == 0) sign = sg;
    total += d;
  }
  // Returns of a slow rotation fall near the same angles on every turn, so
  // the usable number of harmonics is set by the points per turn.
  const double per_turn = std::abs(total) > 0 ? 2 * M_PI * static_cast<double>(N) / std::abs(total) : 0;
  const int K = std::max(1, std::min({harmonics, static_cast<int>((N - 1) / 4), static_cast<int>(per_turn / 4)}));
  Eigen::MatrixXd M(N, 2 * K + 1);
  Eigen::VectorXd r(N);
  for (std::size_t i = 0; i < N; ++i) {
    M(i, 0) = 1;
    for (int k = 1; k <= K; ++k) {
      M(i, 2 * k - 1) = std::cos(k * phi[i]);
      M(i, 2 * k) = std::sin(k * phi[i]);
    }
    r(i) = rho[i];
  }
  Eigen::VectorXd c = M.colPivHouseholderQr().solve(r);
  fit.coeffs.assign(c.data(), c.data() + c.size());
  const double rms = std::sqrt((M * c - r).squaredNorm() / static_cast<double>(N));
  fit.diameter = 2 * std::abs(c(0));
  fit.residual = fit.diameter > 0 ? rms / fit.diameter : std::numeric_limits<double>::infinity();
  fit.closed = fit.monotone && std::abs(total) >= 2 * M_PI && fit.residual < threshold;
  return fit;
}

namespace {

std::size_t section_index(const Section& sec) {
  std::size_t idx = sec.normal.size();
  for (std::size_t i = 0; i < sec.normal.size(); ++i) {
    if (sec.normal[i] == 0) continue;
    if (idx != sec.normal.size()) throw std::invalid_argument("torus_evidence: coordinate sections only");
    idx = i;
  }
  if (idx == sec.normal.size()) throw std::invalid_argument("torus_evidence: zero section normal");
  return idx;
}

std::vector<double> lift(const Section& sec, const std::array<std::size_t, 2>& coords, const std::array<double, 2>& p) {
  const std::size_t idx = section_index(sec);
  std::vector<double> x(sec.normal.size(), 0.0);
  x[idx] = sec.offset / sec.normal[idx];
  x[coords[0]] = p[0];
  x[coords[1]] = p[1];
  return x;
}

// Lagrange interpolation through the given nodes.
double lagrange(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  double s = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double l = 1;
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (j != i) l *= (x - xs[j]) / (xs[i] - xs[j]);
    s += l * ys[i];
  }
  return s;
}

}  // namespace

double slow_turn_displacement(const ODESystem& field, double s, const TorusOptions& opts,
                              std::vector<std::array<double, 2>>* orbit, int* returns) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double en = std::hypot(opts.direction[0], opts.direction[1]);
  const double ex = opts.direction[0] / en, ey = opts.direction[1] / en;
  const std::size_t idx = section_index(opts.section);
  // Returns relative to the center, rotated so that the ray is the positive u axis.
  std::vector<double> us{s}, vs{0.0};
  double angle = 0, last = 0;
  std::vector<double> x = lift(opts.section, opts.coords, {opts.center[0] + s * ex, opts.center[1] + s * ey});
  if (orbit) orbit->push_back({x[opts.coords[0]], x[opts.coords[1]]});
  std::size_t j = 0;  // first return past one full turn
  for (int k = 0; k < opts.max_returns_per_turn; ++k) {
    Crossing c = next_crossing(field, x, opts.section, opts.flight_time, opts.integ);
    if (!c.ok()) return nan;
    x = c.x;
    x[idx] = opts.section.offset / opts.section.normal[idx];
    if (orbit) orbit->push_back({x[opts.coords[0]], x[opts.coords[1]]});
    const double du = x[opts.coords[0]] - opts.center[0], dv = x[opts.coords[1]] - opts.center[1];
    us.push_back(ex * du + ey * dv);
    vs.push_back(ex * dv - ey * du);
    const double a = std::atan2(vs.back(), us.back());
    angle += std::remainder(a - last, 2 * M_PI);
    last = a;
    if (j == 0 && std::abs(angle) >= 2 * M_PI) j = us.size() - 1;
    if (j != 0 && us.size() >= j + 4) break;
  }
  if (j == 0) return nan;
  if (returns) *returns = static_cast<int>(j);
  // The returns sample the slow flow at equal time steps, so u and v are
  // interpolated in the return index; v changes sign between j - 1 and j.
  const std::size_t lo = j >= 4 ? j - 4 : 0, hi = std::min(us.size(), j + 4);
  std::vector<double> ks;
  for (std::size_t k = lo; k < hi; ++k) ks.push_back(static_cast<double>(k));
  std::vector<double> un(us.begin() + static_cast<long>(lo), us.begin() + static_cast<long>(hi));
  std::vector<double> vn(vs.begin() + static_cast<long>(lo), vs.begin() + static_cast<long>(hi));
  double a = static_cast<double>(j - 1), b = static_cast<double>(j);
  double va = vs[j - 1], vb = vs[j];
  if ((va > 0) == (vb > 0)) return nan;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (a + b);
    const double vm = lagrange(ks, vn, m);
    if ((vm > 0) == (va > 0)) {
      a = m;
      va = vm;
    } else {
      b = m;
    }
  }
  return lagrange(ks, un, 0.5 * (a + b)) - s;
}

json TorusEvidence::to_json() const {
  json j;
  j["section"] = section.to_json();
  j["coords"] = coords;
  j["eps"] = eps;
  j["count"] = count;
  j["note"] = note;
  json seeds_j = json::array();
  for (const auto& so : seeds) {
    json pts = json::array();
    const std::size_t stride = so.points.size() / 2000 + 1;
    for (std::size_t i = 0; i < so.points.size(); i += stride) pts.push_back({so.points[i][0], so.points[i][1]});
    seeds_j.push_back({{"seed", so.seed}, {"status", so.status}, {"fit", so.fit.to_json()}, {"returns", pts}});
  }
  j["seeds"] = seeds_j;
  j["scan"] = {{"s", scan_s}, {"displacement", displacement}};
  json cj = json::array();
  for (const auto& c : circles)
    cj.push_back({{"s", c.s},
                  {"point", c.point},
                  {"contraction_inside", c.contraction_inside},
                  {"contraction_outside", c.contraction_outside},
                  {"attracting", c.attracting},
                  {"returns_per_turn", c.returns_per_turn},
                  {"source", c.source}});
  j["circles"] = cj;
  return j;
}

TorusEvidence torus_evidence(const ODESystem& field, double eps, const TorusOptions& opts) {
  if (field.dim() != 3) throw std::invalid_argument("torus_evidence: 3D field required");
  if (eps < 0) throw std::invalid_argument("torus_evidence: eps must be non-negative");
  section_index(opts.section);
  TorusEvidence ev;
  ev.section = opts.section;
  ev.coords = opts.coords;
  ev.eps = eps;
  if (eps == 0) {
    ev.note = "degenerate: eps = 0, every section point is fixed by the unperturbed rotation";
    return ev;
  }
  const double en = std::hypot(opts.direction[0], opts.direction[1]);
  const double ex = opts.direction[0] / en, ey = opts.direction[1] / en;

  if (!opts.scan.empty()) {
    ev.scan_s = opts.scan;
    std::vector<int> per_turn;
    for (double s : opts.scan) {
      int r = 0;
      ev.displacement.push_back(slow_turn_displacement(field, s, opts, nullptr, &r));
      per_turn.push_back(r);
    }
    for (std::size_t i = 0; i + 1 < ev.scan_s.size(); ++i) {
      double sa = ev.scan_s[i], sb = ev.scan_s[i + 1], da = ev.displacement[i], db = ev.displacement[i + 1];
      if (!std::isfinite(da) || !std::isfinite(db) || (da > 0) == (db > 0) || da == 0) continue;
      const double da0 = da, db0 = db, sa0 = sa, sb0 = sb;
      // Illinois refinement of the zero.
      int side = 0;
      for (int it = 0; it < 8; ++it) {
        const double sc = (sa * db - sb * da) / (db - da);
        const double dc = slow_turn_displacement(field, sc, opts);
        if (!std::isfinite(dc)) break;
        if ((dc > 0) == (da > 0)) {
          sa = sc;
          da = dc;
          if (side == -1) db *= 0.5;
          side = -1;
        } else {
          sb = sc;
          db = dc;
          if (side == 1) da *= 0.5;
          side = 1;
        }
      }
      InvariantCircle c;
      c.s = (sa * db - sb * da) / (db - da);
      c.point = {opts.center[0] + c.s * ex, opts.center[1] + c.s * ey};
      c.contraction_inside = 1 + da0 / (sa0 - c.s);
      c.contraction_outside = 1 + db0 / (sb0 - c.s);
      c.attracting = da0 > 0 && db0 < 0;
      c.source = "scan";
      c.returns_per_turn = std::max(per_turn[i], per_turn[i + 1]);
      ev.circles.push_back(c);
    }
  }

  // (seed, transient, returns); points on scan circles need no transient.
  std::vector<std::tuple<std::array<double, 2>, int, int>> seeds;
  for (const auto& seed : opts.seeds) seeds.emplace_back(seed, opts.transient, opts.returns);
  if (opts.seed_scan_circles)
    for (const auto& c : ev.circles)
      seeds.emplace_back(c.point, 0, std::max(opts.returns, c.returns_per_turn + c.returns_per_turn / 4));
  for (const auto& [seed, transient, returns] : seeds) {
    SeedOrbit so;
    so.seed = seed;
    std::vector<double> x = lift(opts.section, opts.coords, seed);
    const int total = transient + returns;
    for (int k = 0; k < total; ++k) {
      Crossing c = next_crossing(field, x, opts.section, opts.flight_time, opts.integ);
      if (!c.ok()) {
        so.status = c.status;
        break;
      }
      x = c.x;
      if (k >= transient) so.points.push_back({x[opts.coords[0]], x[opts.coords[1]]});
    }
    if (so.status == "ok") so.fit = fit_closed_curve(so.points, opts.harmonics, opts.fit_threshold);
    ev.seeds.push_back(std::move(so));
  }

  // Closed seed curves not already represented by a scan zero. Distances use
  // the polygon through the returns sorted by angle about the fitted center.
  auto polygon = [](const SeedOrbit& so) {
    std::vector<std::pair<double, std::array<double, 2>>> v;
    for (const auto& p : so.points)
      v.emplace_back(std::atan2(p[1] - so.fit.center[1], p[0] - so.fit.center[0]), p);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::array<double, 2>> out;
    for (const auto& e : v) out.push_back(e.second);
    return out;
  };
  auto dist_to = [](const std::vector<std::array<double, 2>>& poly, const std::array<double, 2>& p) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto& a = poly[i];
      const auto& b = poly[(i + 1) % poly.size()];
      const double bx = b[0] - a[0], by = b[1] - a[1], px = p[0] - a[0], py = p[1] - a[1];
      const double len2 = bx * bx + by * by;
      const double t = len2 > 0 ? std::clamp((px * bx + py * by) / len2, 0.0, 1.0) : 0.0;
      d = std::min(d, std::hypot(px - t * bx, py - t * by));
    }
    return d;
  };
  auto hausdorff = [&](const std::vector<std::array<double, 2>>& a, const std::vector<std::array<double, 2>>& b) {
    double h = 0;
    for (const auto& p : a) h = std::max(h, dist_to(b, p));
    for (const auto& p : b) h = std::max(h, dist_to(a, p));
    return h;
  };
  std::vector<std::vector<std::array<double, 2>>> curves;
  for (const auto& so : ev.seeds) {
    if (!so.fit.closed) continue;
    auto poly = polygon(so);
    bool dup = false;
    for (const auto& other : curves) dup = dup || hausdorff(poly, other) < opts.merge_distance;
    for (const auto& ic : ev.circles)
      if (ic.source == "scan") dup = dup || dist_to(poly, ic.point) < opts.merge_distance;
    if (dup) continue;
    curves.push_back(std::move(poly));
    InvariantCircle ic;
    ic.source = "seed";
    ic.point = so.points.back();
    ic.s = std::hypot(ic.point[0] - opts.center[0], ic.point[1] - opts.center[1]);
    ic.attracting = true;  // observed forward in time
    ev.circles.push_back(ic);
  }
  ev.count = static_cast<int>(ev.circles.size());
  return ev;
}

json SweepResult::to_json() const {
  json runs_j = json::array();
  for (const auto& r : runs) runs_j.push_back(r.to_json());
  return {{"target", target}, {"hits", hits}, {"best_count", best_count}, {"runs", runs_j}};
}

std::vector<double> log_sweep(double eps_hi, double eps_lo, int points) {
  if (!(eps_hi > 0) || !(eps_lo > 0) || points < 1) throw std::invalid_argument("log_sweep: bad range");
  std::vector<double> out;
  if (points == 1) return {eps_hi};
  const double a = std::log10(eps_hi), b = std::log10(eps_lo);
  for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
  return out;
}

SweepResult eps_sweep(const Field3DSpec& spec, const std::map<std::string, double>& params,
                      const std::vector<double>& eps_values, const TorusOptions& opts, int target, int threads) {
  SweepResult res;
  res.target = target;
  res.runs.resize(eps_values.size());
  auto work = [&](std::size_t i) {
    ODESystem f = ODESystem::from_field(spec, eps_values[i], params);
    res.runs[i] = torus_evidence(f, eps_values[i], opts);
  };
  const std::size_t nt = static_cast<std::size_t>(std::max(1, threads));
  if (nt == 1) {
    for (std::size_t i = 0; i < eps_values.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < eps_values.size(); i += nt) work(i);
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    res.best_count = std::max(res.best_count, res.runs[i].count);
    if (res.runs[i].count == target) res.hits.push_back(eps_values[i]);
  }
  return res;
}

std::string section_csv(const TorusEvidence& ev) {
  std::ostringstream os;
  os << std::setprecision(17) << "kind,index,u,v\n";
  for (std::size_t i = 0; i < ev.seeds.size(); ++i)
    for (const auto& p : ev.seeds[i].points) os << "return," << i << ',' << p[0] << ',' << p[1] << '\n';
  for (std::size_t i = 0; i < ev.circles.size(); ++i)
    os << "circle," << i << ',' << ev.circles[i].point[0] << ',' << ev.circles[i].point[1] << '\n';
  return os.str();
}

std::string section_svg(const TorusEvidence& ev, int size) {
  double lo0 = std::numeric_limits<double>::infinity(), hi0 = -lo0, lo1 = lo0, hi1 = -lo0;
  auto grow = [&](const std::array<double, 2>& p) {
    lo0 = std::min(lo0, p[0]);
    hi0 = std::max(hi0, p[0]);
    lo1 = std::min(lo1, p[1]);
    hi1 = std::max(hi1, p[1]);
  };
  for (const auto& so : ev.seeds)
    for (const auto& p : so.points) grow(p);
  for (const auto& c : ev.circles) grow(c.point);
  if (!(hi0 > lo0)) hi0 = lo0 + 1;
  if (!(hi1 > lo1)) hi1 = lo1 + 1;
  const double span = std::max(hi0 - lo0, hi1 - lo1) * 1.1;
  const double m0 = 0.5 * (lo0 + hi0), m1 = 0.5 * (lo1 + hi1);
  auto X = [&](double u) { return size * (0.5 + (u - m0) / span); };
  auto Y = [&](double v) { return size * (0.5 - (v - m1) / span); };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"8\" y=\"16\" font-size=\"12\">eps = " << ev.eps << ", circles = " << ev.count << "</text>\n";
  for (std::size_t i = 0; i < ev.seeds.size(); ++i)
    for (const auto& p : ev.seeds[i].points)
      os << "<circle cx=\"" << X(p[0]) << "\" cy=\"" << Y(p[1]) << "\" r=\"1.2\" fill=\"" << colors[i % 6]
         << "\"/>\n";
  for (const auto& c : ev.circles)
    os << "<circle cx=\"" << X(c.point[0]) << "\" cy=\"" << Y(c.point[1]) << "\" r=\"4\" fill=\"none\" stroke=\""
       << (c.attracting ? "black" : "red") << "\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace nhtori
