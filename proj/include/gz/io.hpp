#pragma once

#include <json.hpp>
#include <initializer_list>
#include <string>
#include <vector>

#include "gz/bounds.hpp"
#include "gz/geometry.hpp"
#include "gz/kernel.hpp"
#include "gz/montecarlo.hpp"
#include "gz/spectral.hpp"

namespace gz {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

// Throws ConfigError naming the first key not in allowed.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);
double require_number(const json& obj, const char* key, const std::string& where);
double number_or(const json& obj, const char* key, double fallback, const std::string& where);
long integer_or(const json& obj, const char* key, long fallback, const std::string& where);

// {"family": "uniform", "q": 1}, {"family": "stdnormal"}, {"family": "stretched_exp", "alpha": a},
// {"family": "log_type", "gamma": g}, {"family": "atomic", "atoms": [[f, w], ...], "symmetrize": true},
// {"family": "grid_density", "cutoff": R, "values": [...], "compact": true}
SpectralMeasure1D measure1d_from_json(const json& j);
// {"family": "atomic2d", "atoms": [[x, y, w], ...], "symmetrize": true},
// {"family": "product", "x": {...}, "y": {...}}, {"family": "unit_circle"},
// {"family": "stdnormal2d"}, {"family": "radial_stretched_exp", "alpha": a},
// {"family": "radial_log_type", "gamma": g}
SpectralMeasure2D measure2d_from_json(const json& j);
bool is_2d_family(const json& j);

// Missing fields keep the defaults for the dimension.
BoundConstants constants_from_json(const json& j, int dimension);
json to_json(const BoundConstants& k);
json to_json(const BoundReport& r);
json to_json(const TailEstimate& e);
json to_json(const MomentEstimate& e);
json to_json(const CalibrationResult& r);
json to_json(const RegimeReport& r);
json to_json(const DudleyReport& d);
json to_json(const EigenCertificate& c);
json to_json(const CascadeReport& r);
json to_json(const FewZerosReport& r);
json to_json(const NodalBoxReport& r);

// Canonical text of a config, used for hashing.
std::string canonical(const json& j);
std::uint64_t config_hash(const json& j);

json read_json_file(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Binary frame: "GZFRAME1", uint64 header length, JSON header, little-endian float64 data.
void write_frame(const std::string& path, const json& header, const std::vector<double>& data);
std::pair<json, std::vector<double>> read_frame(const std::string& path);

// Tidy CSV rows: x,y,series
std::string tidy_csv(const std::vector<double>& x, const std::vector<double>& y, const std::string& series,
                     bool header = true);

std::string format_double(double x);

}  // namespace gz
