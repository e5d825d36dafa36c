#include "gz/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gz/error.hpp"

namespace gz {

namespace {

[[noreturn]] void config_error(const std::string& msg, const std::string& key) {
  fail(ErrorKind::ConfigError, msg, key);
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) config_error(where + ": missing required key '" + key + "'", key);
  return j.at(key);
}

std::vector<Atom> atoms_1d(const json& arr) {
  if (!arr.is_array() || arr.empty()) config_error("atoms must be a non-empty array of [freq, weight]", "atoms");
  std::vector<Atom> out;
  for (const auto& a : arr) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      config_error("each atom must be [freq, weight]", "atoms");
    out.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be a JSON object", where);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!ok) config_error(where + ": unknown key '" + it.key() + "'", it.key());
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number()) config_error(where + ": '" + key + "' must be a number", key);
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return require_number(obj, key, where);
}

long integer_or(const json& obj, const char* key, long fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) config_error(where + ": '" + key + "' must be an integer", key);
  return v.get<long>();
}

SpectralMeasure1D measure1d_from_json(const json& j) {
  const std::string where = "measure";
  if (!j.is_object()) config_error("measure must be a JSON object", "measure");
  const json& fam = member(j, "family", where);
  if (!fam.is_string()) config_error("measure family must be a string", "family");
  const std::string f = fam.get<std::string>();
  try {
    if (f == "uniform") {
      check_keys(j, {"family", "q"}, where);
      return SpectralMeasure1D::uniform(number_or(j, "q", 1.0, where));
    }
    if (f == "stdnormal") {
      check_keys(j, {"family"}, where);
      return SpectralMeasure1D::std_normal();
    }
    if (f == "stretched_exp") {
      check_keys(j, {"family", "alpha"}, where);
      return SpectralMeasure1D::stretched_exp(require_number(j, "alpha", where));
    }
    if (f == "log_type") {
      check_keys(j, {"family", "gamma"}, where);
      return SpectralMeasure1D::log_type(require_number(j, "gamma", where));
    }
    if (f == "atomic") {
      check_keys(j, {"family", "atoms", "symmetrize"}, where);
      auto atoms = atoms_1d(member(j, "atoms", where));
      bool sym = j.value("symmetrize", false);
      return sym ? SpectralMeasure1D::symmetric_atoms(atoms) : SpectralMeasure1D::atomic(atoms);
    }
    if (f == "grid_density") {
      check_keys(j, {"family", "cutoff", "values", "compact"}, where);
      const json& v = member(j, "values", where);
      if (!v.is_array()) config_error("values must be an array", "values");
      return SpectralMeasure1D::grid_density(require_number(j, "cutoff", where), v.get<std::vector<double>>(),
                                             j.value("compact", true));
    }
  } catch (const std::invalid_argument& e) {
    config_error(std::string("invalid measure: ") + e.what(), "measure");
  }
  config_error("unknown 1D family '" + f + "'", "family");
}

bool is_2d_family(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) return false;
  static const char* k2d[] = {"atomic2d", "product", "unit_circle", "stdnormal2d", "radial_stretched_exp",
                              "radial_log_type"};
  const std::string f = j["family"].get<std::string>();
  return std::any_of(std::begin(k2d), std::end(k2d), [&](const char* s) { return f == s; });
}

SpectralMeasure2D measure2d_from_json(const json& j) {
  const std::string where = "measure";
  if (!j.is_object()) config_error("measure must be a JSON object", "measure");
  const json& fam = member(j, "family", where);
  if (!fam.is_string()) config_error("measure family must be a string", "family");
  const std::string f = fam.get<std::string>();
  try {
    if (f == "atomic2d") {
      check_keys(j, {"family", "atoms", "symmetrize"}, where);
      const json& arr = member(j, "atoms", where);
      if (!arr.is_array() || arr.empty()) config_error("atoms must be a non-empty array of [x, y, w]", "atoms");
      std::vector<Atom2D> atoms;
      for (const auto& a : arr) {
        if (!a.is_array() || a.size() != 3) config_error("each atom must be [x, y, weight]", "atoms");
        atoms.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
      }
      bool sym = j.value("symmetrize", false);
      return sym ? SpectralMeasure2D::symmetric_atoms(atoms) : SpectralMeasure2D::atomic(atoms);
    }
    if (f == "product") {
      check_keys(j, {"family", "x", "y"}, where);
      return SpectralMeasure2D::product(measure1d_from_json(member(j, "x", where)),
                                        measure1d_from_json(member(j, "y", where)));
    }
    if (f == "unit_circle") {
      check_keys(j, {"family"}, where);
      return SpectralMeasure2D::unit_circle_uniform();
    }
    if (f == "stdnormal2d") {
      check_keys(j, {"family"}, where);
      return SpectralMeasure2D::std_normal_2d();
    }
    if (f == "radial_stretched_exp") {
      check_keys(j, {"family", "alpha"}, where);
      return SpectralMeasure2D::radial_stretched_exp(require_number(j, "alpha", where));
    }
    if (f == "radial_log_type") {
      check_keys(j, {"family", "gamma"}, where);
      return SpectralMeasure2D::radial_log_type(require_number(j, "gamma", where));
    }
  } catch (const std::invalid_argument& e) {
    config_error(std::string("invalid measure: ") + e.what(), "measure");
  }
  config_error("unknown 2D family '" + f + "'", "family");
}

BoundConstants constants_from_json(const json& j, int dimension) {
  BoundConstants k;
  if (!j.is_null()) {
    check_keys(j, {"b", "B", "c", "C", "A", "c_lower"}, "constants");
    k.b = number_or(j, "b", k.b, "constants");
    k.B = number_or(j, "B", 0.0, "constants");
    k.c = number_or(j, "c", k.c, "constants");
    k.C = number_or(j, "C", k.C, "constants");
    k.A = number_or(j, "A", 0.0, "constants");
    k.c_lower = number_or(j, "c_lower", k.c_lower, "constants");
    for (double v : {k.b, k.c, k.C, k.c_lower})
      if (!(v > 0.0)) config_error("constants must be positive", "constants");
  }
  return k.resolved(dimension);
}

json to_json(const BoundConstants& k) {
  return {{"b", k.b}, {"B", k.B}, {"c", k.c}, {"C", k.C}, {"A", k.A}, {"c_lower", k.c_lower},
          {"provenance", k.provenance}};
}

json to_json(const BoundReport& r) {
  json pre = json::array();
  for (const auto& p : r.preconditions)
    pre.push_back({{"name", p.name}, {"satisfied", p.satisfied}, {"margin", finite_or_null(p.margin)}});
  json j = {{"formula", r.formula},
            {"eps", r.eps},
            {"n", r.n},
            {"T", r.T},
            {"m", r.m},
            {"moment_root", r.moment_root},
            {"log_argument", finite_or_null(r.log_argument)},
            {"constants", to_json(r.constants)},
            {"preconditions", pre},
            {"valid", r.valid()}};
  if (r.log_bound) j["log_bound"] = *r.log_bound;
  if (r.threshold > 0.0) j["threshold"] = r.threshold;
  return j;
}

json to_json(const TailEstimate& e) {
  return {{"event", e.event},   {"n_samples", e.n_samples}, {"n_hits", e.n_hits},
          {"p_hat", e.p_hat},   {"ci_lo", e.ci_lo},         {"ci_hi", e.ci_hi},
          {"seed", e.seed},     {"method", e.method}};
}

json to_json(const MomentEstimate& e) {
  json mci = json::array();
  for (const auto& c : e.moment_ci) mci.push_back({c.lo, c.hi});
  json j = {{"T", e.T},
            {"n_samples", e.n_samples},
            {"seed", e.seed},
            {"mean", e.mean},
            {"mean_se", e.mean_se},
            {"mean_ci", {e.mean_ci.lo, e.mean_ci.hi}},
            {"moments", e.moments},
            {"moment_ci", mci},
            {"bootstrap", e.bootstrap}};
  if (e.oracle_mean) j["oracle_mean"] = *e.oracle_mean;
  return j;
}

json to_json(const CalibrationResult& r) {
  return {{"name", r.name}, {"value", r.value}, {"domain", r.domain}, {"worst_margin", finite_or_null(r.worst_margin)}};
}

json to_json(const RegimeReport& r) {
  json j = {{"row", to_string(r.row)},
            {"dimension", r.dimension},
            {"n", r.n},
            {"T", r.T},
            {"tail_form", r.tail_form},
            {"moment_form", r.moment_form},
            {"constraint", r.constraint},
            {"constraint_ok", r.constraint_ok},
            {"log_tail", r.log_tail}};
  if (r.row == RegimeRow::Subcritical) {
    j["eps"] = r.eps;
    j["c_kappa"] = r.c_kappa;
  }
  if (r.pieces) j["pieces"] = *r.pieces;
  if (r.log_union_bound) j["log_union_bound"] = *r.log_union_bound;
  if (r.m) j["m"] = *r.m;
  if (r.log_moment_root) j["log_moment_root"] = *r.log_moment_root;
  return j;
}

json to_json(const DudleyReport& d) {
  return {{"n", d.n},
          {"T", d.T},
          {"beta", d.beta},
          {"entropy_integral", d.entropy_integral},
          {"expected_sup_one_sided", d.expected_sup_one_sided},
          {"expected_abs_sup", d.expected_abs_sup},
          {"max_form", d.max_form},
          {"expected_sup", d.expected_sup},
          {"sigma", d.sigma},
          {"A", d.A}};
}

json to_json(const EigenCertificate& c) {
  json j = {{"m", c.m},
            {"T", c.T},
            {"b", c.b},
            {"log_lambda_min", finite_or_null(c.log_lambda_min)},
            {"c_fitted", finite_or_null(c.c_fitted)},
            {"valid", c.valid},
            {"resolved", c.resolved},
            {"precision_bits", c.precision_bits}};
  if (c.c_supplied) {
    j["c"] = *c.c_supplied;
    j["log_bound"] = c.log_bound;
  }
  return j;
}

json to_json(const CascadeReport& r) {
  json lv = json::array();
  for (const auto& l : r.levels)
    lv.push_back({{"k", l.k}, {"measured", l.measured}, {"bound", l.bound}, {"holds", l.holds}});
  return {{"holds", r.holds},
          {"roots_found", r.roots_found},
          {"derivative_sup", r.derivative_sup.padded},
          {"levels", lv}};
}

json to_json(const FewZerosReport& r) {
  return {{"holds", r.holds},
          {"zeros", r.zeros},
          {"threshold", r.threshold},
          {"sup_on_T_2T", r.sup_on_T_2T},
          {"derivative_sup", r.derivative_sup.padded}};
}

json to_json(const NodalBoxReport& r) {
  return {{"bounds_hold", r.holds},
          {"delta", r.delta},
          {"lines", r.lines},
          {"implied_length_cap", r.implied_cap},
          {"measured_length", r.measured_length},
          {"richardson_error", r.richardson_error}};
}

std::string canonical(const json& j) { return j.dump(); }

std::uint64_t config_hash(const json& j) { return fnv1a64(canonical(j)); }

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) config_error("cannot read config file " + path, "config");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what(), "config");
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) config_error("cannot write " + path, "out");
  f << text;
}

namespace {
constexpr char kMagic[8] = {'G', 'Z', 'F', 'R', 'A', 'M', 'E', '1'};

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(x);
  return x;
}
}  // namespace

void write_frame(const std::string& path, const json& header, const std::vector<double>& data) {
  json h = header;
  h["schema_version"] = kSchemaVersion;
  h["count"] = data.size();
  std::string hs = h.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) config_error("cannot write " + path, "out");
  f.write(kMagic, 8);
  std::uint64_t len = to_le(hs.size());
  f.write(reinterpret_cast<const char*>(&len), 8);
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (double d : data) {
    std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(d));
    f.write(reinterpret_cast<const char*>(&bits), 8);
  }
}

std::pair<json, std::vector<double>> read_frame(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) config_error("cannot read " + path, "frame");
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) config_error("not a frame file: " + path, "frame");
  std::uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), 8);
  len = to_le(len);
  std::string hs(len, '\0');
  f.read(hs.data(), static_cast<std::streamsize>(len));
  json h = json::parse(hs);
  std::size_t n = h.at("count").get<std::size_t>();
  std::vector<double> data(n);
  for (auto& d : data) {
    std::uint64_t bits = 0;
    f.read(reinterpret_cast<char*>(&bits), 8);
    d = std::bit_cast<double>(to_le(bits));
  }
  if (!f) config_error("truncated frame file: " + path, "frame");
  return {h, data};
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string tidy_csv(const std::vector<double>& x, const std::vector<double>& y, const std::string& series,
                     bool header) {
  if (x.size() != y.size()) throw std::invalid_argument("tidy_csv needs equal lengths");
  std::ostringstream os;
  if (header) os << "x,y,series\n";
  for (std::size_t i = 0; i < x.size(); ++i) os << format_double(x[i]) << ',' << format_double(y[i]) << ',' << series << '\n';
  return os.str();
}

}  // namespace gz
