#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "gz/error.hpp"
#include "gz/io.hpp"

using namespace gz;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::CertificateFalsified;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("measure parsing") {
  auto u = measure1d_from_json(json::parse(R"({"family":"uniform","q":1})"));
  CHECK(std::abs(moments_1d(u, 2).C(2) - 1.0 / 3.0) <= 1e-12);
  auto g = measure1d_from_json(json::parse(R"({"family":"stdnormal"})"));
  CHECK(std::abs(moments_1d(g, 4).C(4) - 3.0) <= 1e-9);
  auto a = measure1d_from_json(json::parse(R"({"family":"atomic","atoms":[[2,1]],"symmetrize":true})"));
  CHECK(std::abs(moments_1d(a, 2).C(2) - 4.0) <= 1e-12);
  auto c = measure2d_from_json(json::parse(R"({"family":"unit_circle"})"));
  CHECK(std::abs(moments_2d(c, 2).C2(2, 0) - 0.5) <= 1e-9);
  auto p = measure2d_from_json(json::parse(R"({"family":"product","x":{"family":"uniform"},"y":{"family":"stdnormal"}})"));
  CHECK(std::abs(moments_2d(p, 2).C2(0, 2) - 1.0) <= 1e-9);
  CHECK(is_2d_family(json::parse(R"({"family":"stdnormal2d"})")));
  CHECK_FALSE(is_2d_family(json::parse(R"({"family":"stdnormal"})")));
}

TEST_CASE("config errors") {
  CHECK(kind_of([] { measure1d_from_json(json::parse(R"({"q":1})")); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { measure1d_from_json(json::parse(R"({"family":"uniform","qq":1})")); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { measure1d_from_json(json::parse(R"({"family":"nope"})")); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { measure1d_from_json(json::parse(R"({"family":"stretched_exp","alpha":"x"})")); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { measure2d_from_json(json::parse(R"({"family":"atomic2d","atoms":[[1,2]]})")); }) ==
        ErrorKind::ConfigError);
  try {
    check_keys(json::parse(R"({"a":1,"zz":2})"), {"a"}, "cfg");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    CHECK(e.detail() == "zz");
  }
  CHECK(integer_or(json::parse(R"({"n":3})"), "n", 1, "cfg") == 3);
  CHECK(integer_or(json::object(), "n", 1, "cfg") == 1);
  CHECK(kind_of([] { integer_or(json::parse(R"({"n":3.5})"), "n", 1, "cfg"); }) == ErrorKind::ConfigError);
  CHECK(exit_code(ErrorKind::ConfigError) == 2);
  CHECK(exit_code(ErrorKind::DivergentMoment) == 3);
  CHECK(exit_code(ErrorKind::PreconditionFailed) == 4);
  CHECK(exit_code(ErrorKind::CertificateFalsified) == 5);
}

TEST_CASE("constants from json") {
  auto k = constants_from_json(json::parse(R"({"c":0.25})"), 1);
  CHECK(k.c == 0.25);
  CHECK(k.b == BoundConstants::defaults(1).b);
  CHECK(kind_of([] { constants_from_json(json::parse(R"({"c":-1})"), 1); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { constants_from_json(json::parse(R"({"d":1})"), 1); }) == ErrorKind::ConfigError);
  json j = to_json(k);
  CHECK(j["c"] == 0.25);
}

TEST_CASE("config hash ignores key order") {
  json a = json::parse(R"({"seed":1,"measure":{"family":"uniform","q":1},"n":3})");
  json b = json::parse(R"({"n":3,"measure":{"q":1,"family":"uniform"},"seed":1})");
  CHECK(canonical(a) == canonical(b));
  CHECK(config_hash(a) == config_hash(b));
  b["seed"] = 2;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("frame roundtrip") {
  auto path = (std::filesystem::temp_directory_path() / "gz_io_test.gzf").string();
  std::vector<double> d{0.0, -1.5, 1e-300, std::numeric_limits<double>::infinity(), M_PI};
  write_frame(path, {{"kind", "test"}}, d);
  auto [h, back] = read_frame(path);
  CHECK(h["kind"] == "test");
  CHECK(h["schema_version"] == kSchemaVersion);
  CHECK(back == d);
  write_text(path, "nope");
  CHECK(kind_of([&] { read_frame(path); }) == ErrorKind::ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("tidy csv") {
  auto s = tidy_csv({1.0, 2.0}, {0.5, 0.25}, "k");
  CHECK(s == "x,y,series\n1,0.5,k\n2,0.25,k\n");
  CHECK(tidy_csv({}, {}, "k", false).empty());
  CHECK_THROWS(tidy_csv({1.0}, {}, "k"));
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("estimate json") {
  auto e = make_estimate("ev", 3, 1000, 7, "grid_exact");
  json j = to_json(e);
  CHECK(j["n_hits"] == 3);
  CHECK(j["method"] == "grid_exact");
  CHECK(j["ci_lo"].get<double>() <= j["p_hat"].get<double>());
  CHECK(j["p_hat"].get<double>() <= j["ci_hi"].get<double>());
  CHECK_FALSE(j.contains("runtime_s"));
}
