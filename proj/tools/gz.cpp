#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "gz/bounds.hpp"
#include "gz/error.hpp"
#include "gz/geometry.hpp"
#include "gz/io.hpp"
#include "gz/kernel.hpp"
#include "gz/montecarlo.hpp"
#include "gz/sampler.hpp"
#include "gz/spectral.hpp"

using namespace gz;

namespace {

struct Ctx {
  json cfg;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

[[noreturn]] void bad(const std::string& msg, const std::string& key) { fail(ErrorKind::ConfigError, msg, key); }

void emit(const Ctx& c, const std::string& text) {
  if (c.out.empty()) std::cout << text;
  else write_text(c.out, text);
}

void emit_json(const Ctx& c, json j) {
  j["schema_version"] = kSchemaVersion;
  emit(c, j.dump(2) + "\n");
}

std::string csv_stamp() { return "# schema_version: " + std::to_string(kSchemaVersion) + "\n"; }

long positive_int(const json& j, const char* key, long fallback, const char* where, long lo = 1) {
  long v = integer_or(j, key, fallback, where);
  if (v < lo) bad(std::string(where) + ": '" + key + "' must be >= " + std::to_string(lo), key);
  return v;
}

double positive_number(const json& j, const char* key, double fallback, const char* where) {
  double v = number_or(j, key, fallback, where);
  if (!(v > 0.0)) bad(std::string(where) + ": '" + key + "' must be positive", key);
  return v;
}

const json& measure_of(const json& cfg) {
  if (!cfg.contains("measure")) bad("config: missing required key 'measure'", "measure");
  return cfg["measure"];
}

// ---------------------------------------------------------------------------

int cmd_moments(const Ctx& c) {
  check_keys(c.cfg, {"schema_version", "measure", "max_order", "method"}, "moments");
  const json& mj = measure_of(c.cfg);
  int max_order = static_cast<int>(positive_int(c.cfg, "max_order", 4, "moments", 0));
  std::string method = c.cfg.value("method", "auto");
  if (method != "auto" && method != "quadrature") bad("moments: method must be auto or quadrature", "method");
  MomentMethod mm = method == "auto" ? MomentMethod::Auto : MomentMethod::Quadrature;
  std::ostringstream os;
  os << csv_stamp();
  if (is_2d_family(mj)) {
    MomentTable t = moments_2d(measure2d_from_json(mj), max_order, mm);
    os << "n,R_n,L_n\n";
    for (int n = 1; n <= max_order; ++n)
      os << n << ',' << format_double(std::exp(t.log_R(n))) << ',' << format_double(std::exp(t.log_L(n))) << '\n';
  } else {
    MomentTable t = moments_1d(measure1d_from_json(mj), max_order, mm);
    os << "n,C_n,D_n\n";
    for (int n = 0; n <= max_order; ++n)
      os << n << ',' << format_double(t.C(n)) << ',' << format_double(t.D(n)) << '\n';
  }
  emit(c, os.str());
  return 0;
}

std::string precondition_table(const BoundReport& r) {
  std::ostringstream os;
  os << "precondition,satisfied,margin\n";
  for (const auto& p : r.preconditions)
    os << p.name << ',' << (p.satisfied ? "yes" : "no") << ',' << format_double(p.margin) << '\n';
  os << "log_bound," << (r.log_bound ? format_double(*r.log_bound) : "n/a") << ",\n";
  return os.str();
}

int finish_bound(const Ctx& c, const BoundReport& r, const char* field) {
  if (c.format == "table") std::cerr << precondition_table(r);
  require(r);
  json j = to_json(r);
  j[field] = *r.log_bound;
  emit_json(c, j);
  return 0;
}

int cmd_bounds(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "kind", "eps", "n", "T", "m", "eta", "D_root", "L_root", "measure", "constants",
                 "row", "dimension", "moment_order", "alpha", "gamma", "kappa", "q", "log_Dn"},
             "bounds");
  if (!j.contains("kind") || !j["kind"].is_string()) bad("bounds: missing required key 'kind'", "kind");
  const std::string kind = j["kind"];
  int dim = kind == "theorem2_upper" ? 2 : static_cast<int>(integer_or(j, "dimension", 1, "bounds"));
  BoundConstants k = constants_from_json(j.value("constants", json()), dim);
  auto root_from = [&](const char* key, bool two, long n) -> double {
    if (j.contains(key)) return positive_number(j, key, 1.0, "bounds");
    if (!j.contains("measure")) bad(std::string("bounds: needs '") + key + "' or 'measure'", key);
    if (two) return moments_2d(measure2d_from_json(j["measure"]), static_cast<int>(n)).L_root(static_cast<int>(n));
    return moments_1d(measure1d_from_json(j["measure"]), static_cast<int>(n)).D_root(static_cast<int>(n));
  };
  if (kind == "theorem1_upper" || kind == "theorem2_upper") {
    double eps = require_number(j, "eps", "bounds");
    long n = positive_int(j, "n", 1, "bounds");
    double T = require_number(j, "T", "bounds");
    bool two = kind == "theorem2_upper";
    double root = root_from(two ? "L_root" : "D_root", two, n);
    return finish_bound(c, two ? theorem2_upper(eps, n, T, root, k) : theorem1_upper(eps, n, T, root, k),
                        "log_bound");
  }
  if (kind == "theorem1_lower") {
    long n = positive_int(j, "n", 1, "bounds");
    double T = require_number(j, "T", "bounds");
    return finish_bound(c, theorem1_lower(n, T, k.c_lower, k.b), "log_bound_lower");
  }
  if (kind == "smallball") {
    long m = positive_int(j, "m", 1, "bounds");
    return finish_bound(c, smallball_bound(m, require_number(j, "T", "bounds"), require_number(j, "eta", "bounds"),
                                           k.C, k.b),
                        "log_bound");
  }
  if (kind == "lemsbp") {
    long n = positive_int(j, "n", 1, "bounds");
    LemsbpChain ch = lemsbp_bound(require_number(j, "eps", "bounds"), n, require_number(j, "T", "bounds"),
                                  number_or(j, "log_Dn", 0.0, "bounds"), k);
    if (c.format == "table") std::cerr << precondition_table(ch.report);
    require(ch.report);
    json o = to_json(ch.report);
    o["chain"] = {{"log_W", ch.log_W}, {"log_lline", ch.log_lline}, {"log_middle", ch.log_middle},
                  {"log_final", ch.log_final}, {"h", ch.h}, {"log_M", ch.log_M}, {"log_eta", ch.log_eta}};
    emit_json(c, o);
    return 0;
  }
  if (kind == "dudley") {
    int n = static_cast<int>(positive_int(j, "n", 0, "bounds", 0));
    MomentTable mt = moments_1d(measure1d_from_json(measure_of(j)), std::max(n, 1));
    emit_json(c, to_json(dudley_sup_bound(mt, n, require_number(j, "T", "bounds"), k.A)));
    return 0;
  }
  if (kind == "regime") {
    if (!j.contains("row") || !j["row"].is_string()) bad("bounds: regime needs 'row'", "row");
    RegimeParams p;
    p.alpha = number_or(j, "alpha", p.alpha, "bounds");
    p.gamma = number_or(j, "gamma", p.gamma, "bounds");
    p.kappa = number_or(j, "kappa", p.kappa, "bounds");
    p.q = number_or(j, "q", p.q, "bounds");
    p.c = k.c;
    p.C = k.C;
    std::optional<int> m;
    if (j.contains("moment_order")) m = static_cast<int>(positive_int(j, "moment_order", 1, "bounds"));
    RegimeReport r = regime_table(parse_regime_row(j["row"]), dim, require_number(j, "n", "bounds"),
                                  require_number(j, "T", "bounds"), m, p);
    emit_json(c, to_json(r));
    return 0;
  }
  bad("bounds: unknown kind '" + kind + "'", "kind");
}

int cmd_simulate(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "measure", "method", "extent", "points", "n_paths", "n_waves"}, "simulate");
  const json& mj = measure_of(j);
  std::string method = j.value("method", "exact");
  if (method != "exact" && method != "spectral") bad("simulate: method must be exact or spectral", "method");
  GridSpec g;
  g.extent = positive_number(j, "extent", 1.0, "simulate");
  g.points = static_cast<int>(positive_int(j, "points", 101, "simulate", 2));
  long n_paths = positive_int(j, "n_paths", 1, "simulate");
  int n_waves = static_cast<int>(positive_int(j, "n_waves", 4096, "simulate"));
  bool two = is_2d_family(mj);
  g.dimension = two ? 2 : 1;
  std::ostringstream os;
  os << csv_stamp() << "x,y,series\n";
  std::vector<double> frame;
  for (long p = 0; p < n_paths; ++p) {
    PathSample s;
    if (two) {
      auto mu = measure2d_from_json(mj);
      s = method == "exact" ? sample_exact(mu, g, c.seed, p) : sample_spectral(mu, g, c.seed, n_waves, p);
    } else {
      auto mu = measure1d_from_json(mj);
      s = method == "exact" ? sample_exact(mu, g, c.seed, p) : sample_spectral(mu, g, c.seed, n_waves, p);
    }
    frame.insert(frame.end(), s.values.begin(), s.values.end());
    if (!two) {
      std::vector<double> x(g.points);
      for (int i = 0; i < g.points; ++i) x[i] = g.coord_x(i);
      os << tidy_csv(x, s.values, "path" + std::to_string(p), false);
    } else {
      for (int jy = 0; jy < g.points; ++jy)
        for (int ix = 0; ix < g.points; ++ix)
          os << format_double(g.coord_x(ix)) << ',' << format_double(g.coord_y(jy)) << ",field" << p << ':'
             << format_double(s.values[jy * g.points + ix]) << '\n';
    }
  }
  if (!c.out.empty() && c.out.size() > 4 && c.out.substr(c.out.size() - 4) == ".gzf") {
    write_frame(c.out, {{"command", "simulate"}, {"config", j}, {"seed", c.seed}, {"points", g.points},
                        {"dimension", g.dimension}, {"n_paths", n_paths}},
                frame);
    return 0;
  }
  emit(c, os.str());
  return 0;
}

McOptions mc_options(const json& j, const char* where, bool tail_method = true) {
  McOptions o;
  if (tail_method && j.contains("method")) o.method = parse_tail_method(j["method"].get<std::string>());
  o.grid_points = static_cast<int>(integer_or(j, "grid_points", 0, where));
  if (o.grid_points != 0 && o.grid_points < 3) bad(std::string(where) + ": grid_points must be >= 3", "grid_points");
  o.n_waves = static_cast<int>(positive_int(j, "n_waves", o.n_waves, where));
  o.resolution = static_cast<int>(positive_int(j, "resolution", o.resolution, where, 4));
  o.check_a1 = j.value("check_density", true);
  return o;
}

int cmd_zeros(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "measure", "T", "n_paths", "method", "grid_points", "n_waves", "check_density"},
             "zeros");
  auto mu = measure1d_from_json(measure_of(j));
  double T = positive_number(j, "T", 1.0, "zeros");
  long n_paths = positive_int(j, "n_paths", 1, "zeros");
  McOptions o = mc_options(j, "zeros");
  auto hist = zero_count_histogram(mu, T, n_paths, c.seed, o);
  std::ostringstream os;
  os << csv_stamp() << "count,paths\n";
  for (std::size_t k = 0; k < hist.size(); ++k) os << k << ',' << hist[k] << '\n';
  emit(c, os.str());
  return 0;
}

int cmd_nodal(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "measure", "T", "resolution", "n_fields", "n_waves", "check_density"}, "nodal");
  auto mu = measure2d_from_json(measure_of(j));
  double T = positive_number(j, "T", 1.0, "nodal");
  long n_fields = positive_int(j, "n_fields", 1, "nodal");
  int res = static_cast<int>(positive_int(j, "resolution", 128, "nodal", 4));
  int n_waves = static_cast<int>(positive_int(j, "n_waves", 1024, "nodal"));
  SpectralSampler2D sampler(mu, n_waves, T);
  GridSpec g;
  g.dimension = 2;
  g.extent = T;
  g.points = res + 1;
  std::ostringstream os;
  os << csv_stamp() << "field,length,richardson_error,line_bound\n";
  for (long f = 0; f < n_fields; ++f) {
    WaveSum2D w = sampler.draw(c.seed, f);
    auto vals = w.on_grid(g);
    auto center = [&](double x, double y) { return w.eval(x, y); };
    NodalLengthResult nl = nodal_length_grid(vals, g.points, g.spacing(), center);
    LineBound lb = line_intersection_bound_grid(vals, g.points, g.spacing());
    os << f << ',' << format_double(nl.length) << ',' << format_double(nl.richardson_error) << ','
       << format_double(lb.bound) << '\n';
  }
  emit(c, os.str());
  return 0;
}

// c * prod (x - r_i), or explicit coefficients a_0 .. a_d
struct Poly {
  std::vector<double> a;
  double deriv(int order, double x) const {
    double s = 0.0;
    for (int k = static_cast<int>(a.size()) - 1; k >= order; --k) {
      double f = 1.0;
      for (int i = 0; i < order; ++i) f *= (k - i);
      s = s * x + a[k] * f;
    }
    return s;
  }
};

Poly poly_from(const json& j, const char* where) {
  Poly p;
  if (j.contains("coefficients")) {
    p.a = j["coefficients"].get<std::vector<double>>();
  } else if (j.contains("roots")) {
    p.a = {number_or(j, "scale", 1.0, where)};
    for (double r : j["roots"].get<std::vector<double>>()) {
      std::vector<double> q(p.a.size() + 1, 0.0);
      for (std::size_t k = 0; k < p.a.size(); ++k) {
        q[k + 1] += p.a[k];
        q[k] -= r * p.a[k];
      }
      p.a = q;
    }
  } else {
    bad(std::string(where) + ": needs 'roots' or 'coefficients'", "roots");
  }
  if (p.a.empty()) bad(std::string(where) + ": empty polynomial", "coefficients");
  return p;
}

int cmd_certify(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "kind", "roots", "scale", "coefficients", "n", "T", "M", "offset", "waves",
                 "measure", "m", "c", "sup_resolution"},
             "certify");
  if (!j.contains("kind") || !j["kind"].is_string()) bad("certify: missing required key 'kind'", "kind");
  const std::string kind = j["kind"];
  if (kind == "cascade" || kind == "few_zeros") {
    Poly p = poly_from(j, "certify");
    int n = static_cast<int>(positive_int(j, "n", 1, "certify"));
    double T = positive_number(j, "T", 1.0, "certify");
    double M = require_number(j, "M", "certify");
    int res = static_cast<int>(positive_int(j, "sup_resolution", 2048, "certify", 8));
    Deriv1 f = [&](int o, double x) { return p.deriv(o, x); };
    json out = kind == "cascade" ? to_json(cascade_check(f, n, T, M, res))
                                 : to_json(no_more_than_n_zeros_check(f, n, T, M, res));
    emit_json(c, out);
    if (!out["holds"].get<bool>()) fail(ErrorKind::CertificateFalsified, "certificate conclusion fails");
    return 0;
  }
  if (kind == "nodal_box") {
    // g = offset + sum amp * cos(kx x + ky y + phase)
    double offset = number_or(j, "offset", 0.0, "certify");
    std::vector<std::array<double, 4>> waves;
    if (j.contains("waves"))
      for (const auto& w : j["waves"]) {
        auto v = w.get<std::vector<double>>();
        if (v.size() != 4) bad("certify: each wave is [amp, kx, ky, phase]", "waves");
        waves.push_back({v[0], v[1], v[2], v[3]});
      }
    Deriv2 g = [&](int ox, int oy, double x, double y) {
      double s = (ox == 0 && oy == 0) ? offset : 0.0;
      for (const auto& w : waves)
        s += w[0] * std::pow(w[1], ox) * std::pow(w[2], oy) *
             std::cos(w[1] * x + w[2] * y + w[3] + 0.5 * M_PI * (ox + oy));
      return s;
    };
    int n = static_cast<int>(positive_int(j, "n", 1, "certify"));
    NodalBoxReport r = nodal_box_certificate(g, n, positive_number(j, "T", 1.0, "certify"),
                                             positive_number(j, "M", 1.0, "certify"));
    emit_json(c, to_json(r));
    if (!r.holds) fail(ErrorKind::CertificateFalsified, "measured nodal length exceeds 4nT");
    return 0;
  }
  if (kind == "eigen") {
    auto mu = measure1d_from_json(measure_of(j));
    std::optional<double> cc;
    if (j.contains("c")) cc = positive_number(j, "c", 1.0, "certify");
    EigenCertificate e = eigen_certificate(mu, static_cast<int>(positive_int(j, "m", 2, "certify")),
                                           positive_number(j, "T", 1.0, "certify"), cc);
    emit_json(c, to_json(e));
    if (cc && e.resolved && !e.valid) fail(ErrorKind::CertificateFalsified, "eigenvalue below the certified bound");
    return 0;
  }
  bad("certify: unknown kind '" + kind + "'", "kind");
}

int cmd_mc(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "measure", "event", "n", "T", "n_samples", "eta", "method", "grid_points",
                 "n_waves", "resolution", "m_max", "check_density", "ledger"},
             "mc");
  if (!j.contains("event") || !j["event"].is_string()) bad("mc: missing required key 'event'", "event");
  const std::string ev = j["event"];
  long n_samples = positive_int(j, "n_samples", 10000, "mc");
  double T = positive_number(j, "T", 1.0, "mc");
  // the alternating event has its own method names
  McOptions o = mc_options(j, "mc", ev != "alternating");
  std::uint64_t h = config_hash(j);
  Ledger ledger;
  json out;
  if (ev == "zero_tail") {
    auto e = estimate_zero_tail(measure1d_from_json(measure_of(j)), static_cast<int>(positive_int(j, "n", 1, "mc", 0)),
                                T, n_samples, c.seed, o);
    ledger.append(e, h);
    out = to_json(e);
  } else if (ev == "smallball") {
    std::vector<double> etas;
    if (j.contains("eta") && j["eta"].is_array()) etas = j["eta"].get<std::vector<double>>();
    else etas = {positive_number(j, "eta", 0.1, "mc")};
    auto es = estimate_smallball(measure1d_from_json(measure_of(j)), T, etas, n_samples, c.seed, o);
    out = json::array();
    for (auto& e : es) {
      ledger.append(e, h);
      out.push_back(to_json(e));
    }
    out = {{"estimates", out}};
  } else if (ev == "nodal_tail") {
    auto e = estimate_nodal_tail(measure2d_from_json(measure_of(j)), static_cast<int>(positive_int(j, "n", 1, "mc")),
                                 T, n_samples, c.seed, o);
    ledger.append(e, h);
    out = to_json(e);
  } else if (ev == "moments") {
    int m_max = static_cast<int>(positive_int(j, "m_max", 2, "mc"));
    const json& mj = measure_of(j);
    MomentEstimate e = is_2d_family(mj)
                           ? estimate_expectation_and_moments(measure2d_from_json(mj), T, m_max, n_samples, c.seed, o)
                           : estimate_expectation_and_moments(measure1d_from_json(mj), T, m_max, n_samples, c.seed, o);
    out = to_json(e);
  } else if (ev == "alternating") {
    std::string m = j.value("method", "mc");
    auto meth = m == "orthant_grid" ? OrthantMethod::OrthantGrid : OrthantMethod::Mc;
    if (m != "mc" && m != "orthant_grid") bad("mc: alternating method must be mc or orthant_grid", "method");
    auto e = alternating_sign_probability(measure1d_from_json(measure_of(j)),
                                          static_cast<int>(positive_int(j, "n", 1, "mc")), T, meth, n_samples, c.seed);
    ledger.append(e, h);
    out = to_json(e);
  } else {
    bad("mc: unknown event '" + ev + "'", "event");
  }
  out["config_hash"] = h;
  if (j.contains("ledger")) ledger.write(j["ledger"].get<std::string>());
  emit_json(c, out);
  return 0;
}

int cmd_calibrate(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "measure", "m_min", "m_max", "t_steps", "smallball_m", "smallball_T",
                 "lower_points", "lower_samples", "fit_lower", "method", "grid_points"},
             "calibrate");
  CalibrationSweep sw;
  sw.m_min = static_cast<int>(positive_int(j, "m_min", sw.m_min, "calibrate", 2));
  sw.m_max = static_cast<int>(positive_int(j, "m_max", sw.m_max, "calibrate", 2));
  sw.t_steps = static_cast<int>(positive_int(j, "t_steps", sw.t_steps, "calibrate"));
  if (j.contains("smallball_m")) sw.smallball_m = j["smallball_m"].get<std::vector<int>>();
  if (j.contains("smallball_T")) sw.smallball_T = j["smallball_T"].get<std::vector<double>>();
  if (j.contains("lower_points")) {
    sw.lower_points.clear();
    for (const auto& p : j["lower_points"]) sw.lower_points.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
  }
  sw.lower_samples = positive_int(j, "lower_samples", sw.lower_samples, "calibrate");
  sw.fit_lower = j.value("fit_lower", true);
  sw.seed = c.seed;
  McOptions o = mc_options(j, "calibrate");
  Calibration cal = calibrate_constants(measure1d_from_json(measure_of(j)), sw, o);
  json res = json::array();
  for (const auto& r : cal.results) res.push_back(to_json(r));
  json un = json::array();
  for (const auto& p : cal.unresolved_lower) un.push_back({p.first, p.second});
  emit_json(c, {{"results", res}, {"constants", to_json(cal.constants)}, {"b_density", cal.b_density},
                {"unresolved_lower", un}});
  return 0;
}

int cmd_report(const Ctx& c) {
  const json& j = c.cfg;
  check_keys(j, {"schema_version", "ledger"}, "report");
  if (!j.contains("ledger")) bad("report: missing required key 'ledger'", "ledger");
  std::ifstream f(j["ledger"].get<std::string>());
  if (!f) bad("report: cannot read ledger", "ledger");
  std::stringstream buf;
  buf << f.rdbuf();
  std::string text = buf.str();
  json rows = json::array();
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) bad("report: malformed ledger row", "ledger");
    rows.push_back({{"event", cells[0]}, {"config_hash", cells[1]}, {"n_samples", std::stol(cells[2])},
                    {"n_hits", std::stol(cells[3])}, {"p_hat", std::stod(cells[4])},
                    {"ci", {std::stod(cells[5]), std::stod(cells[6])}}, {"method", cells[8]}});
  }
  emit_json(c, {{"rows", rows}, {"count", rows.size()}, {"ledger_hash", fnv1a64(text)}});
  return 0;
}

void report_error(const std::string& kind, const std::string& msg, const std::string& field,
                  const std::string& detail) {
  json e = {{"error", kind}, {"message", msg}, {"schema_version", kSchemaVersion}};
  if (!detail.empty()) e[field] = detail;
  std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gz: zero counts and nodal lengths of stationary Gaussian processes"};
  app.require_subcommand(1);
  std::map<std::string, std::function<int(const Ctx&)>> handlers = {
      {"moments", cmd_moments}, {"bounds", cmd_bounds},   {"simulate", cmd_simulate},
      {"zeros", cmd_zeros},     {"nodal", cmd_nodal},     {"certify", cmd_certify},
      {"mc", cmd_mc},           {"calibrate", cmd_calibrate}, {"report", cmd_report}};
  std::map<std::string, std::string> help = {
      {"moments", "spectral moment table as CSV"},
      {"bounds", "evaluate a tail or small-ball bound with its preconditions"},
      {"simulate", "sample paths or fields on a grid"},
      {"zeros", "zero-count histogram of sampled paths"},
      {"nodal", "nodal length and line bound of sampled fields"},
      {"certify", "deterministic certificates (cascade, few_zeros, nodal_box, eigen)"},
      {"mc", "Monte Carlo estimates appended to a ledger"},
      {"calibrate", "fit constants over a sweep"},
      {"report", "summarize a ledger"}};

  std::string config_path, inline_json, out, format = "json";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<CLI::App*> subs;
  for (const auto& [name, h] : handlers) {
    CLI::App* s = app.add_subcommand(name, help[name]);
    s->add_option("--config", config_path, "JSON config file");
    s->add_option("--json", inline_json, "inline JSON config");
    s->add_option("--out", out, "output path (stdout when omitted)");
    s->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { seed = v; seed_set = true; },
                                          "random seed");
    s->add_option("--format", format, "json or table (bounds)")->check(CLI::IsMember({"json", "table"}));
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    Ctx ctx;
    if (!config_path.empty()) ctx.cfg = read_json_file(config_path);
    else if (!inline_json.empty()) {
      try {
        ctx.cfg = json::parse(inline_json);
      } catch (const json::parse_error& e) {
        fail(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what(), "config");
      }
    } else {
      fail(ErrorKind::ConfigError, "no config given; use --config or --json", "config");
    }
    if (!ctx.cfg.is_object()) fail(ErrorKind::ConfigError, "config must be a JSON object", "config");
    if (ctx.cfg.contains("schema_version") && ctx.cfg["schema_version"] != kSchemaVersion)
      fail(ErrorKind::ConfigError, "unsupported schema_version", "schema_version");
    ctx.seed = seed_set ? seed : 0;
    ctx.out = out;
    ctx.format = format;
    for (CLI::App* s : subs)
      if (s->parsed()) return handlers[s->get_name()](ctx);
    return 2;
  } catch (const Error& e) {
    const char* field = e.kind() == ErrorKind::PreconditionFailed ? "precondition" : "detail";
    if (e.kind() == ErrorKind::ConfigError) field = "key";
    report_error(to_string(e.kind()), e.what(), field, e.detail());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    report_error("ConfigError", e.what(), "key", "");
    return 2;
  } catch (const std::invalid_argument& e) {
    report_error("ConfigError", e.what(), "key", "");
    return 2;
  } catch (const std::exception& e) {
    report_error("NumericError", e.what(), "detail", "");
    return 3;
  }
}
