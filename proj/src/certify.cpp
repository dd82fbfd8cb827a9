#include "nhtori/certify.hpp"

#include "nhtori/poly_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nhtori {

using json = nlohmann::json;

namespace {

using Matrix = std::vector<std::vector<Rational>>;

Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<Rational>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) throw std::domain_error("singular Jacobian");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    Rational p = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational m = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= m * a[c][j];
        inv[r][j] -= m * inv[c][j];
      }
    }
  }
  return inv;
}

Rational round_significant(const Rational& q, int digits) {
  if (q == 0) return q;
  double mag = std::fabs(q.get_d());
  int e = mag > 0 ? static_cast<int>(std::floor(std::log10(mag))) : -300;
  int keep = std::max(0, digits - 1 - e);
  return round_decimal(q, static_cast<unsigned>(keep));
}

Matrix jacobian_at(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                   const std::map<std::string, Rational>& at) {
  Matrix J(fs.size(), std::vector<Rational>(vars.size(), 0));
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < vars.size(); ++j)
      if (fs[i].var_index(vars[j]) >= 0) J[i][j] = fs[i].derivative(vars[j]).evaluate(at);
  return J;
}

std::map<std::string, Rational> point_map(const std::vector<std::string>& vars, const std::vector<Rational>& x) {
  std::map<std::string, Rational> m;
  for (std::size_t i = 0; i < vars.size(); ++i) m[vars[i]] = x[i];
  return m;
}

IntervalBox box_map(const std::vector<std::string>& vars, const Box& box) {
  IntervalBox b;
  for (std::size_t i = 0; i < vars.size(); ++i)
    b[vars[i]] = Interval(box.center[i] - box.radius[i], box.center[i] + box.radius[i]);
  return b;
}

json interval_json(const Interval& x) {
  return {{"lower", to_string(x.lower())}, {"upper", to_string(x.upper())}, {"approx", to_sci_string(x, 10)}};
}

json matrix_json(const IntervalMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(interval_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json rational_matrix_json(const Matrix& m) {
  json rows = json::array();
  for (const auto& r : m) {
    json row = json::array();
    for (const auto& v : r) row.push_back(to_string(v));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Box Box::cube(std::vector<Rational> center, const Rational& r) {
  Box b;
  b.radius.assign(center.size(), r);
  b.center = std::move(center);
  b.validate();
  return b;
}

void Box::validate() const {
  if (center.size() != radius.size()) throw std::invalid_argument("box center and radius differ in dimension");
  for (const auto& r : radius)
    if (r <= 0) throw std::invalid_argument("box half-widths must be positive");
}

json Box::to_json() const {
  json c = json::array(), r = json::array();
  for (const auto& v : center) c.push_back(to_string(v));
  for (const auto& v : radius) r.push_back(to_string(v));
  return {{"center", c}, {"radius", r}};
}

json AffineMap::to_json() const {
  json c = json::array();
  for (const auto& v : center) c.push_back(to_string(v));
  return {{"vars", vars}, {"uvars", uvars}, {"center", c}, {"A", rational_matrix_json(A)}, {"M", rational_matrix_json(M)}};
}

RatPoly Preconditioned::pull_back(const RatPoly& h) const {
  VarList uv = make_vars(map.uvars);
  std::map<std::string, RatPoly> sub;
  for (std::size_t i = 0; i < map.vars.size(); ++i) {
    if (h.var_index(map.vars[i]) < 0) continue;
    RatPoly e = RatPoly::constant(uv, map.center[i]);
    for (std::size_t j = 0; j < map.uvars.size(); ++j)
      if (map.A[i][j] != 0) e += RatPoly::variable(uv, map.uvars[j]) * map.A[i][j];
    sub[map.vars[i]] = e;
  }
  return sub.empty() ? h : h.substitute(sub);
}

Preconditioned affine_precondition(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                                   const std::vector<Rational>& approx_root, const PreconditionOptions& opts) {
  const std::size_t n = vars.size();
  if (fs.size() != n || approx_root.size() != n) throw std::invalid_argument("square system expected");
  Matrix J = jacobian_at(fs, vars, point_map(vars, approx_root));
  Matrix A = inverse(J);
  for (auto& row : A)
    for (auto& v : row) v = round_significant(v, opts.digits);
  Preconditioned out;
  out.map.vars = vars;
  for (std::size_t i = 0; i < n; ++i) out.map.uvars.push_back("u" + std::to_string(i + 1));
  out.map.center = approx_root;
  out.map.A = A;
  out.map.M.assign(n, std::vector<Rational>(n, 0));
  for (std::size_t i = 0; i < n; ++i) out.map.M[i][i] = 1;
  if (!opts.left_identity) {
    Matrix JA(n, std::vector<Rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) JA[i][j] += J[i][k] * A[k][j];
    out.map.M = inverse(JA);
    for (auto& row : out.map.M)
      for (auto& v : row) v = round_significant(v, opts.digits);
  }
  std::vector<RatPoly> pulled;
  for (const auto& f : fs) pulled.push_back(out.pull_back(f));
  VarList uv = make_vars(out.map.uvars);
  for (std::size_t i = 0; i < n; ++i) {
    RatPoly g(uv);
    for (std::size_t k = 0; k < n; ++k)
      if (out.map.M[i][k] != 0) g += pulled[k] * out.map.M[i][k];
    out.g.push_back(g);
  }
  // Dg(0) must be near the identity
  Matrix D = jacobian_at(out.g, out.map.uvars, point_map(out.map.uvars, std::vector<Rational>(n, 0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dev = std::fabs(Rational(D[i][j] - Rational(i == j ? 1 : 0)).get_d());
      if (!(dev <= 1e-6)) throw std::domain_error("preconditioned Jacobian is not close to the identity");
    }
  return out;
}

json PMCertificate::to_json() const {
  json fj = json::array();
  for (const auto& f : faces) fj.push_back({{"index", f.index}, {"side", f.side}, {"enclosure", interval_json(f.value)}});
  return {{"vars", vars}, {"box", box.to_json()}, {"faces", fj}, {"bits", bits}, {"verdict", verdict}};
}

PMCertificate pm_check(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars, const Box& box,
                       unsigned bits) {
  box.validate();
  if (fs.size() != vars.size() || box.center.size() != vars.size())
    throw std::invalid_argument("dimension mismatch between functions, variables and box");
  PMCertificate cert;
  cert.vars = vars;
  cert.box = box;
  cert.bits = bits;
  bool ok = true;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    Interval side_value[2];
    for (int s = 0; s < 2; ++s) {
      int side = s == 0 ? 1 : -1;
      IntervalBox b = box_map(vars, box);
      b[vars[i]] = Interval(box.center[i] + Rational(side) * box.radius[i]);
      Interval v = interval_eval(fs[i], b, bits);
      cert.faces.push_back({static_cast<int>(i), side, v});
      side_value[s] = v;
    }
    const Interval& p = side_value[0];
    const Interval& m = side_value[1];
    bool opposite = (p.strictly_positive() && m.strictly_negative()) || (p.strictly_negative() && m.strictly_positive());
    ok = ok && opposite;
  }
  cert.verdict = ok ? "certified" : "unknown";
  return cert;
}

Rational GerschgorinCertificate::max_radius() const {
  Rational m = 0;
  for (const auto& r : radius) m = std::max(m, r);
  return m;
}

json GerschgorinCertificate::to_json() const {
  json d = json::array(), r = json::array();
  for (const auto& v : diagonal) d.push_back(interval_json(v));
  for (const auto& v : radius) r.push_back({{"bound", to_string(v)}, {"approx", to_sci_string(v, 10)}});
  return {{"matrix", matrix_json(matrix)}, {"diagonal", d}, {"radius", r}, {"verdict", verdict}};
}

GerschgorinCertificate gerschgorin_regular(const IntervalMatrix& J) {
  if (J.rows != J.cols) throw std::invalid_argument("Gerschgorin test needs a square matrix");
  GerschgorinCertificate cert;
  cert.matrix = J;
  bool ok = J.rows > 0;
  for (std::size_t i = 0; i < J.rows; ++i) {
    Rational R = 0;
    for (std::size_t j = 0; j < J.cols; ++j)
      if (j != i) R += J(i, j).magnitude();
    cert.diagonal.push_back(J(i, i));
    cert.radius.push_back(R);
    ok = ok && J(i, i).mignitude() > R;
  }
  cert.verdict = ok ? "nonsingular" : "unknown";
  return cert;
}

IntervalMatrix jacobian_enclosure(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars, const Box& box,
                                  unsigned bits) {
  IntervalMatrix J(fs.size(), vars.size());
  IntervalBox b = box_map(vars, box);
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < vars.size(); ++j)
      J(i, j) = fs[i].var_index(vars[j]) < 0 ? Interval(Rational(0)) : interval_eval(fs[i].derivative(vars[j]), b, bits);
  return J;
}

json SimpleZeroCertificate::to_json() const {
  json ex = json::array();
  for (const auto& e : extra) ex.push_back(interval_json(e));
  return {{"verdict", verdict},
          {"affine_map", system.map.to_json()},
          {"poincare_miranda", pm.to_json()},
          {"gerschgorin_box", gerschgorin.to_json()},
          {"gerschgorin_center", gerschgorin_center.to_json()},
          {"extra", ex}};
}

SimpleZeroCertificate certify_simple_zero(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                                          const std::vector<Rational>& approx_root, const Rational& radius,
                                          const CertifyOptions& opts) {
  SimpleZeroCertificate out;
  out.system = affine_precondition(fs, vars, approx_root, opts.precondition);
  const auto& uvars = out.system.map.uvars;
  Box box = Box::cube(std::vector<Rational>(vars.size(), 0), radius);
  out.pm = pm_check(out.system.g, uvars, box, opts.bits);
  out.gerschgorin = gerschgorin_regular(jacobian_enclosure(out.system.g, uvars, box, opts.bits));
  Box center = box;
  IntervalMatrix Jc(vars.size(), vars.size());
  std::map<std::string, Rational> zero;
  for (const auto& u : uvars) zero[u] = 0;
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = 0; j < vars.size(); ++j)
      Jc(i, j) = out.system.g[i].var_index(uvars[j]) < 0 ? Interval(Rational(0))
                                                          : Interval(out.system.g[i].derivative(uvars[j]).evaluate(zero));
  out.gerschgorin_center = gerschgorin_regular(Jc);
  IntervalBox b = box_map(uvars, box);
  for (const auto& h : opts.extra) {
    RatPoly p = out.system.pull_back(h);
    if (opts.normalize_extra) {
      Rational c = p.constant_term();
      if (c == 0) throw std::domain_error("extra function vanishes at the approximate root");
      p = p / round_significant(c, opts.precondition.digits);
    }
    out.extra.push_back(interval_eval(p, b, opts.bits));
  }
  out.verdict = out.pm.certified() && out.gerschgorin.nonsingular() ? "simple zero certified" : "not certified";
  return out;
}

std::vector<Rational> newton_refine(const std::vector<RatPoly>& fs, const std::vector<std::string>& vars,
                                    std::vector<Rational> x, int iterations, int digits) {
  const std::size_t n = vars.size();
  if (fs.size() != n || x.size() != n) throw std::invalid_argument("square system expected");
  for (int it = 0; it < iterations; ++it) {
    auto at = point_map(vars, x);
    Matrix Jinv = inverse(jacobian_at(fs, vars, at));
    std::vector<Rational> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = fs[i].evaluate(at);
    bool small = true;
    std::vector<Rational> next = x;
    for (std::size_t i = 0; i < n; ++i) {
      Rational d = 0;
      for (std::size_t j = 0; j < n; ++j) d += Jinv[i][j] * f[j];
      next[i] = round_decimal(x[i] - d, static_cast<unsigned>(digits));
      if (next[i] != x[i]) small = false;
    }
    x = std::move(next);
    if (small) break;
  }
  return x;
}

}  // namespace nhtori
