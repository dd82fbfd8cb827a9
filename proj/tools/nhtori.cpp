#include "nhtori/averaging.hpp"
#include "nhtori/bounds.hpp"
#include "nhtori/certify.hpp"
#include "nhtori/dynamics.hpp"
#include "nhtori/fixtures.hpp"
#include "nhtori/gentrig.hpp"
#include "nhtori/hopfprep.hpp"
#include "nhtori/lyapunov.hpp"
#include "nhtori/poly_parse.hpp"
#include "nhtori/scenarios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace nhtori;
using json = nlohmann::json;

namespace {

struct Globals {
  unsigned precision = 256;
  int threads = 1;
  std::uint64_t seed = 1;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void emit_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// "a:b[:c]" as doubles.
std::vector<double> range_of(const std::string& s) {
  std::vector<double> v;
  for (const auto& p : split(s, ':')) v.push_back(std::stod(p));
  return v;
}

std::map<std::string, Rational> rational_point(const json& j) {
  std::map<std::string, Rational> pt;
  for (auto& [k, v] : j.items()) pt[k] = v.is_string() ? parse_rational(v.get<std::string>()) : rational_from_double(v.get<double>());
  return pt;
}

// ---------------------------------------------------------------------------

int cmd_moments(int n, int max_degree, const std::string& emit, const Globals& g) {
  std::ostringstream os;
  os << "n,p,q,exact,numeric\n";
  for (int p = 0; p <= max_degree; ++p)
    for (int q = 0; p + q <= max_degree; ++q) {
      ConstScalar m = moment(n, p, q);
      Interval e = m.enclosure(std::max(g.precision, 128u));
      os << n << "," << p << "," << q << ",\"" << m.to_string() << "\"," << to_sci_string((e.lower() + e.upper()) / 2, 30)
         << "\n";
    }
  write_text(emit, os.str());
  return 0;
}

int cmd_derive(const std::string& input, int order, const std::string& emit) {
  auto spec = Field3DSpec::from_json(load_json_file(input));
  auto sf = to_standard_form(spec, order);
  GuidingSystem g = order == 1 ? first_averaged(sf) : second_melnikov(sf);
  emit_json(emit, g.to_json());
  return 0;
}

int cmd_normalize(const std::string& guiding, const std::string& rho, const std::string& w0, const std::string& tau,
                  const std::string& omega, const std::string& basis, const std::string& d_param,
                  const std::string& emit) {
  auto g = GuidingSystem::from_json(load_json_file(guiding));
  NormalizeOptions opts;
  if (!d_param.empty()) opts.d_param = d_param;
  auto [gn, norm] = normalize_at(g, parse_poly(rho), parse_poly(w0), parse_poly(tau), parse_poly(omega), opts);
  std::optional<std::array<std::array<MultiPoly, 2>, 2>> B;
  if (!basis.empty()) {
    auto rows = split(basis, ';');
    if (rows.size() != 2) throw std::invalid_argument("--basis expects 'b00,b01;b10,b11'");
    std::array<std::array<MultiPoly, 2>, 2> b;
    for (int i = 0; i < 2; ++i) {
      auto cols = split(rows[i], ',');
      if (cols.size() != 2) throw std::invalid_argument("--basis expects 'b00,b01;b10,b11'");
      for (int k = 0; k < 2; ++k) b[i][k] = parse_poly(cols[k]);
    }
    B = b;
  }
  auto J = jordan_form(gn, norm, B);
  json out = J.to_json();
  out["guiding"] = gn.to_json();
  out["normalization"] = norm.to_json();
  emit_json(emit, out);
  return 0;
}

int cmd_lyapunov(const std::string& jordan, int count, int trunc, const std::string& at, const std::string& emit) {
  auto sys = PlanarJordanSystem::from_json(load_json_file(jordan)).at_tau_zero();
  TruncationPolicy pol;
  pol.max_degree = trunc;
  auto L = lyapunov_coefficients(sys, count, pol);
  json out = L.to_json();
  if (!at.empty()) {
    auto pt = rational_point(load_json_file(at));
    json vals = json::array();
    for (const auto& l : L.L) {
      Rational v = l.evaluate(pt);
      vals.push_back({{"exact", to_string(v)}, {"numeric", to_sci_string(v, 30)}});
    }
    out["values"] = vals;
  }
  emit_json(emit, out);
  return 0;
}

int cmd_certify(const std::string& system, const std::string& center, const std::string& radius,
                const std::string& report, const Globals& g, bool replay) {
  auto L = FocusQuantitySequence::from_json(load_json_file(system));
  auto pt = rational_point(load_json_file(center));
  std::vector<std::string> vars;
  std::vector<Rational> mu;
  for (const auto& [k, v] : pt) {
    vars.push_back(k);
    mu.push_back(v);
  }
  if (L.L.size() < vars.size()) throw std::invalid_argument("fewer focus quantities than center coordinates");
  std::vector<RatPoly> fs(L.L.begin(), L.L.begin() + vars.size());
  CertifyOptions opts;
  if (L.L.size() > vars.size()) opts.extra = {L.L[vars.size()]};
  auto c = certify_simple_zero(fs, vars, mu, parse_rational(radius), opts);
  json out = c.to_json();
  bool ok = c.certified();
  if (replay) {
    auto r = pm_check(c.system.g, c.system.map.uvars, c.pm.box, g.precision);
    out["replay"] = {{"bits", g.precision}, {"verdict", r.verdict}};
    ok = ok && r.certified();
  }
  emit_json(report, out);
  std::cerr << c.verdict << "\n";
  return ok ? 0 : 1;
}

int cmd_unfold(const std::string& system, const std::string& point, int k, double ratio, double zero_tol,
               const std::string& emit) {
  auto L = FocusQuantitySequence::from_json(load_json_file(system));
  json pj = load_json_file(point);
  UnfoldOptions opts;
  opts.ratio = ratio;
  opts.zero_tolerance = zero_tol;
  std::vector<UnfoldStep> steps;
  if (zero_tol > 0) {
    std::map<std::string, double> pt;
    for (auto& [name, v] : pj.items())
      pt[name] = v.is_string() ? to_double(parse_rational(v.get<std::string>())) : v.get<double>();
    steps = unfold_schedule(L.L, pt, k, opts);
  } else {
    steps = unfold_schedule(L.L, rational_point(pj), k, opts);
  }
  json out = json::array();
  for (const auto& s : steps) out.push_back(s.to_json());
  emit_json(emit, out);
  return 0;
}

struct SimulateArgs {
  std::string input, params, sweep = "1e-1:1e-4", section = "y=0", center = "1,0", scan = "0.01:0.57:0.02", seeds;
  std::string emit, plot, csv;
  double eps = 0;
  int points = 4, target = 3, transient = 50, returns = 200;
  double rtol = 1e-11;
};

int cmd_simulate(const SimulateArgs& a, const Globals& g) {
  auto spec = Field3DSpec::from_json(load_json_file(a.input));
  std::map<std::string, double> params;
  if (!a.params.empty())
    for (auto& [k, v] : load_json_file(a.params).items()) params[k] = v.get<double>();

  TorusOptions o;
  auto eq = a.section.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("--section expects var=value");
  const std::string var = a.section.substr(0, eq);
  const std::vector<std::string> names{"x", "y", "z"};
  auto it = std::find(names.begin(), names.end(), var);
  if (it == names.end()) throw std::invalid_argument("--section variable must be x, y or z");
  const std::size_t idx = it - names.begin();
  o.section = Section::coordinate(3, idx, std::stod(a.section.substr(eq + 1)), 1);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < 3; ++i)
    if (i != idx) rest.push_back(i);
  o.coords = {rest[0], rest[1]};
  auto c = split(a.center, ',');
  if (c.size() != 2) throw std::invalid_argument("--center expects u,v");
  o.center = {std::stod(c[0]), std::stod(c[1])};
  auto sc = range_of(a.scan);
  if (sc.size() != 3 || sc[2] <= 0) throw std::invalid_argument("--scan expects start:stop:step");
  for (int i = 0; sc[0] + i * sc[2] <= sc[1] + 1e-12; ++i) o.scan.push_back(sc[0] + i * sc[2]);
  for (const auto& s : split(a.seeds, ';')) {
    auto uv = split(s, ',');
    if (uv.size() != 2) throw std::invalid_argument("--seeds expects 'u,v;u,v'");
    o.seeds.push_back({std::stod(uv[0]), std::stod(uv[1])});
  }
  o.transient = a.transient;
  o.returns = a.returns;
  o.integ.rtol = a.rtol;

  std::vector<double> eps_values;
  if (a.eps > 0) {
    eps_values = {a.eps};
  } else {
    auto r = range_of(a.sweep);
    if (r.size() != 2) throw std::invalid_argument("--eps-sweep expects hi:lo");
    eps_values = log_sweep(r[0], r[1], a.points);
  }
  auto res = eps_sweep(spec, params, eps_values, o, a.target, g.threads);
  json out = res.to_json();
  out["seed"] = g.seed;
  emit_json(a.emit, out);

  // plot the run with the most circles (first such eps)
  std::size_t best = 0;
  for (std::size_t i = 0; i < res.runs.size(); ++i)
    if (res.runs[i].count > res.runs[best].count) best = i;
  if (!a.plot.empty() && !res.runs.empty()) write_text(a.plot, section_svg(res.runs[best]));
  if (!a.csv.empty() && !res.runs.empty()) write_text(a.csv, section_csv(res.runs[best]));

  for (const auto& r : res.runs) std::cerr << "eps " << sci(r.eps, 2) << ": " << r.count << " circle(s)\n";
  if (res.hits.empty())
    std::cerr << "target count " << a.target << " not observed\n";
  return res.best_count >= 1 ? 0 : 1;
}

int cmd_bounds(const std::string& seeds, int m_max, const std::string& emit) {
  std::map<int, std::int64_t> s;
  for (const auto& kv : split(seeds, ',')) {
    auto p = split(kv, ':');
    if (p.size() != 2) throw std::invalid_argument("--seeds expects 'm:tau,m:tau'");
    s[std::stoi(p[0])] = std::stoll(p[1]);
  }
  auto t = bound_table(s, m_max);
  if (emit.size() > 5 && emit.substr(emit.size() - 5) == ".json") {
    emit_json(emit, t.to_json());
    return 0;
  }
  std::ostringstream os;
  os << "m,tau,provenance\n";
  for (const auto& [m, e] : t.entries) os << m << "," << e.tau << ",\"" << e.provenance << "\"\n";
  write_text(emit, os.str());
  return 0;
}

int cmd_reproduce(const std::vector<std::string>& names_in, const std::string& report, bool simulate, bool sweep,
                  const Globals& g) {
  std::vector<std::string> names = names_in;
  if (names.size() == 1 && names[0] == "all") names = scenario_names();
  ScenarioOptions opts;
  opts.precision = g.precision;
  opts.threads = g.threads;
  opts.seed = g.seed;
  opts.simulate = simulate;
  opts.sweep = sweep;
  json reports = json::array();
  bool ok = true;
  for (const auto& n : names) {
    auto r = reproduce(n, opts);
    std::cout << r.summary();
    ok = ok && r.pass();
    reports.push_back(r.to_json());
  }
  if (!report.empty()) emit_json(report, reports.size() == 1 ? reports[0] : reports);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normally hyperbolic invariant tori: averaging, focus quantities, certification and simulation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--precision", g.precision, "bits for interval replays and enclosures")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for eps-sweeps")->capture_default_str();
  app.add_option("--seed", g.seed, "seed recorded in randomized outputs")->capture_default_str();

  int n = 1, max_degree = 12;
  std::string emit;
  auto* moments = app.add_subcommand("moments", "table of I(p, q) over one period of Cs, Sn");
  moments->add_option("--n", n, "Andreev number (1..3)")->capture_default_str();
  moments->add_option("--max", max_degree, "largest p + q")->capture_default_str();
  moments->add_option("--emit", emit, "CSV output (stdout when omitted)");

  std::string input;
  int order = 1;
  auto* derive = app.add_subcommand("derive", "guiding system of a field by averaging");
  derive->add_option("--input", input, "Field3DSpec JSON")->required();
  derive->add_option("--order", order, "averaging order")->check(CLI::IsMember({1, 2}))->capture_default_str();
  derive->add_option("--emit", emit, "guiding system JSON");

  std::string guiding, rho = "1", w0 = "0", tau = "tau", omega = "1", basis, d_param;
  auto* normalize = app.add_subcommand("normalize", "Hopf point and real Jordan form of a guiding system");
  normalize->add_option("--guiding", guiding, "guiding system JSON")->required();
  normalize->add_option("--rho", rho)->capture_default_str();
  normalize->add_option("--w0", w0)->capture_default_str();
  normalize->add_option("--tau", tau)->capture_default_str();
  normalize->add_option("--omega", omega)->capture_default_str();
  normalize->add_option("--basis", basis, "Jordan basis 'b00,b01;b10,b11' with (r - rho, w - w0) = B (x, y)");
  normalize->add_option("--d-param", d_param, "parameter replaced by the symbol d");
  normalize->add_option("--emit", emit, "Jordan system JSON");

  std::string jordan, at;
  int count = 3, trunc = -1;
  auto* lyap = app.add_subcommand("lyapunov", "focus quantities L1..Lk of a Jordan system");
  lyap->add_option("--jordan", jordan, "Jordan system JSON")->required();
  lyap->add_option("--count", count)->capture_default_str();
  lyap->add_option("--trunc", trunc, "parameter-degree truncation (-1 exact)")->capture_default_str();
  lyap->add_option("--at", at, "point JSON for 30-digit evaluations");
  lyap->add_option("--emit", emit, "focus quantity JSON");

  std::string system, center, radius = "1e-10", report;
  bool replay = false;
  auto* certify = app.add_subcommand("certify", "Poincare-Miranda and Gerschgorin certificate of a simple zero");
  certify->add_option("--system", system, "focus quantity JSON")->required();
  certify->add_option("--center", center, "approximate zero JSON")->required();
  certify->add_option("--radius", radius)->capture_default_str();
  certify->add_option("--report", report, "certificate JSON");
  certify->add_flag("--replay", replay, "replay the sign test at --precision bits");

  std::string point;
  int k = 3;
  double ratio = 1e-2, zero_tol = 0;
  auto* unfold = app.add_subcommand("unfold", "nested degenerate-Hopf unfolding schedule");
  unfold->add_option("--system", system, "focus quantity JSON")->required();
  unfold->add_option("--point", point, "point with L1 = ... = L(k-1) = 0")->required();
  unfold->add_option("--k", k)->capture_default_str();
  unfold->add_option("--ratio", ratio)->capture_default_str();
  unfold->add_option("--zero-tolerance", zero_tol, "accept approximate zeros (0 = exact)")->capture_default_str();
  unfold->add_option("--emit", emit);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "section-return evidence of invariant tori");
  simulate->add_option("--input", sa.input, "Field3DSpec JSON")->required();
  simulate->add_option("--params", sa.params, "parameter values JSON");
  simulate->add_option("--eps-sweep", sa.sweep, "hi:lo")->capture_default_str();
  simulate->add_option("--points", sa.points, "sweep points")->capture_default_str();
  simulate->add_option("--eps", sa.eps, "single eps instead of a sweep");
  simulate->add_option("--section", sa.section, "var=value")->capture_default_str();
  simulate->add_option("--center", sa.center, "guiding equilibrium u,v in section coordinates")->capture_default_str();
  simulate->add_option("--scan", sa.scan, "displacement scan start:stop:step")->capture_default_str();
  simulate->add_option("--seeds", sa.seeds, "extra seeds 'u,v;u,v'");
  simulate->add_option("--transient", sa.transient)->capture_default_str();
  simulate->add_option("--returns", sa.returns)->capture_default_str();
  simulate->add_option("--rtol", sa.rtol)->capture_default_str();
  simulate->add_option("--target", sa.target, "circle count looked for")->capture_default_str();
  simulate->add_option("--emit", sa.emit, "evidence JSON");
  simulate->add_option("--plot", sa.plot, "SVG of the section returns");
  simulate->add_option("--csv", sa.csv, "CSV of the section returns");

  std::string seeds = "2:3,3:5,4:7,5:13";
  int m_max = 16;
  auto* bounds = app.add_subcommand("bounds", "lower-bound table by lifts and monotonicity");
  bounds->add_option("--seeds", seeds, "m:tau list")->capture_default_str();
  bounds->add_option("--max", m_max)->capture_default_str();
  bounds->add_option("--emit", emit, "CSV, or JSON when the name ends in .json");

  std::vector<std::string> names;
  bool no_simulate = false, no_sweep = false, list = false;
  auto* repro = app.add_subcommand("reproduce", "run a shipped scenario against its golden data");
  repro->add_option("name", names, "scenario name(s) or 'all'");
  repro->add_option("--report", report, "JSON report");
  repro->add_flag("--no-simulate", no_simulate, "skip numerical stages");
  repro->add_flag("--no-sweep", no_sweep, "skip the eps-sweep");
  repro->add_flag("--list", list, "list scenarios");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*moments) return cmd_moments(n, max_degree, emit, g);
    if (*derive) return cmd_derive(input, order, emit);
    if (*normalize) return cmd_normalize(guiding, rho, w0, tau, omega, basis, d_param, emit);
    if (*lyap) return cmd_lyapunov(jordan, count, trunc, at, emit);
    if (*certify) return cmd_certify(system, center, radius, report, g, replay);
    if (*unfold) return cmd_unfold(system, point, k, ratio, zero_tol, emit);
    if (*simulate) return cmd_simulate(sa, g);
    if (*bounds) return cmd_bounds(seeds, m_max, emit);
    if (*repro) {
      if (list || names.empty()) {
        for (const auto& s : scenario_names()) std::cout << s << "\n";
        return names.empty() && !list ? 2 : 0;
      }
      return cmd_reproduce(names, report, !no_simulate, !no_sweep, g);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
