#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

fs::path scratch() {
  fs::path d = fs::temp_directory_path() / "gz_cli_test";
  fs::create_directories(d);
  return d;
}

Run gz(const std::string& sub, const std::string& cfg, const std::string& extra = "") {
  fs::path d = scratch();
  std::string cmd = std::string(GZ_CLI_PATH) + " " + sub;
  if (!cfg.empty()) cmd += " --json " + quote(cfg);
  cmd += " " + extra + " >" + (d / "out.txt").string() + " 2>" + (d / "err.txt").string();
  int st = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.out = slurp(d / "out.txt");
  r.err = slurp(d / "err.txt");
  return r;
}

}  // namespace

TEST_CASE("help lists subcommands") {
  Run r = gz("--help", "");
  CHECK(r.code == 0);
  for (const char* s : {"moments", "bounds", "simulate", "zeros", "nodal", "certify", "mc", "calibrate", "report"})
    CHECK(r.out.find(s) != std::string::npos);
  CHECK(gz("", "").code == 2);
}

TEST_CASE("moments csv") {
  Run r = gz("moments", R"({"measure":{"family":"uniform","q":1},"max_order":4})");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# schema_version: 1\n", 0) == 0);
  CHECK(r.out.find("\n2,0.33333333333333") != std::string::npos);
  Run g = gz("moments", R"({"measure":{"family":"stdnormal"},"max_order":4})");
  REQUIRE(g.code == 0);
  auto at = g.out.find("\n4,");
  REQUIRE(at != std::string::npos);
  CHECK(std::abs(std::stod(g.out.substr(at + 3)) - 3.0) <= 1e-12);
  Run bad = gz("moments", R"({"measure":{"q":1}})");
  CHECK(bad.code == 2);
  json e = json::parse(bad.err);
  CHECK(e["error"] == "ConfigError");
  CHECK(e["key"] == "family");
  CHECK(gz("moments", R"({"measure":{"family":"uniform"},"colour":1})").code == 2);
  CHECK(gz("moments", "{not json").code == 2);
  CHECK(gz("moments", R"({"measure":{"family":"uniform"},"schema_version":9})").code == 2);
}

TEST_CASE("bounds json") {
  Run up = gz("bounds", R"({"kind":"theorem1_upper","eps":0.25,"n":10000,"T":1,"D_root":1,"constants":{"B":0.1}})");
  REQUIRE(up.code == 0);
  json j = json::parse(up.out);
  CHECK(j.contains("log_bound"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["log_bound"].get<double>() < 0.0);
  Run fail = gz("bounds", R"({"kind":"theorem1_upper","eps":0.25,"n":100,"T":1,"D_root":1,"constants":{"B":0.1}})");
  CHECK(fail.code == 4);
  CHECK(json::parse(fail.err)["precondition"] == "argument_ge_e");
  Run lo = gz("bounds", R"({"kind":"theorem1_lower","n":4,"T":1,"constants":{"c_lower":10,"b":0.5}})");
  REQUIRE(lo.code == 0);
  CHECK(std::abs(json::parse(lo.out)["log_bound_lower"].get<double>() + 16 * std::log(40.0)) <= 1e-9);
  CHECK(gz("bounds", R"({"kind":"theorem1_lower","n":1,"T":1})").code == 4);
  CHECK(gz("bounds", R"({"kind":"nope"})").code == 2);
  Run tab = gz("bounds", R"({"kind":"smallball","m":4,"T":1,"eta":0.1})", "--format table");
  CHECK(tab.code == 0);
  CHECK(tab.err.find("precondition,satisfied,margin") != std::string::npos);
}

TEST_CASE("certify") {
  Run r = gz("certify", R"({"kind":"cascade","roots":[0,0.1,0.2],"scale":1,"n":3,"T":0.2,"M":6})");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["holds"] == true);
  CHECK(gz("certify", R"({"kind":"cascade","roots":[0,0.1,0.2],"scale":1,"n":3,"T":0.2,"M":5})").code == 4);
  Run nb = gz("certify", R"({"kind":"nodal_box","offset":2,"waves":[[1,1,0,0]],"n":4,"T":1,"M":2.2})");
  CHECK(nb.code == 0);
  Run e = gz("certify", R"({"kind":"eigen","measure":{"family":"uniform"},"m":3,"T":0.5})");
  REQUIRE(e.code == 0);
  CHECK(json::parse(e.out).contains("log_lambda_min"));
}

TEST_CASE("mc and ledger") {
  fs::path ledger = scratch() / "ledger.csv";
  fs::remove(ledger);
  fs::remove(ledger.string() + ".runtime.csv");
  std::string cfg = R"({"measure":{"family":"uniform"},"event":"zero_tail","n":2,"T":3,"n_samples":2000,"ledger":")" +
                    ledger.string() + "\"}";
  Run a = gz("mc", cfg, "--seed 4");
  REQUIRE(a.code == 0);
  Run b = gz("mc", cfg, "--seed 4");
  json ja = json::parse(a.out), jb = json::parse(b.out);
  CHECK(ja["n_hits"] == jb["n_hits"]);
  CHECK(ja["config_hash"] == jb["config_hash"]);
  Run rep = gz("report", R"({"ledger":")" + ledger.string() + "\"}");
  REQUIRE(rep.code == 0);
  json jr = json::parse(rep.out);
  CHECK(jr["count"] == 2);
  CHECK(jr["rows"][0]["n_hits"] == jr["rows"][1]["n_hits"]);
  CHECK(fs::exists(ledger.string() + ".runtime.csv"));
  CHECK(gz("mc", R"({"measure":{"family":"uniform"},"event":"zero_tail","n_samples":0})").code == 2);
  Run alt = gz("mc", R"({"measure":{"family":"uniform"},"event":"alternating","n":1,"T":1,"method":"orthant_grid"})");
  REQUIRE(alt.code == 0);
  CHECK(std::abs(json::parse(alt.out)["p_hat"].get<double>() - (0.25 - std::asin(std::sin(1.0)) / (2 * M_PI))) <= 1e-4);
}

TEST_CASE("simulate is deterministic") {
  fs::path d = scratch();
  std::string cfg = R"({"measure":{"family":"stdnormal"},"extent":2,"points":33,"n_paths":2})";
  for (const char* ext : {".csv", ".gzf"}) {
    fs::path p1 = d / (std::string("s1") + ext), p2 = d / (std::string("s2") + ext);
    REQUIRE(gz("simulate", cfg, "--seed 3 --out " + p1.string()).code == 0);
    REQUIRE(gz("simulate", cfg, "--seed 3 --out " + p2.string()).code == 0);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(!slurp(p1).empty());
  }
  REQUIRE(gz("simulate", cfg, "--seed 5 --out " + (d / "s3.csv").string()).code == 0);
  CHECK(slurp(d / "s1.csv") != slurp(d / "s3.csv"));
}

TEST_CASE("zeros and nodal commands") {
  Run z = gz("zeros", R"({"measure":{"family":"uniform"},"T":3.14159,"n_paths":500})", "--seed 1");
  CHECK(z.code == 0);
  CHECK(!z.out.empty());
  Run n = gz("nodal", R"({"measure":{"family":"unit_circle"},"T":2,"n_fields":2,"resolution":32,"n_waves":64})");
  CHECK(n.code == 0);
  CHECK(gz("nodal", R"({"measure":{"family":"uniform"},"T":2})").code == 2);
}
