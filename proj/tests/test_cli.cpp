#include "bilip/cli.hpp"

#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bilip_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path path = dir / "config.json";
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BILIP_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("factorize identity produces an empty factor list") {
  const auto dir = fresh_dir("identity");
  const auto cfg = write_config(dir, {{"command", "factorize"},
                                      {"map", {{"kind", "identity"}}},
                                      {"n", 2},
                                      {"eps", 0.5},
                                      {"samples", 100},
                                      {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " + (dir / "out").string()) ==
        0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["factor_count"] == 0);
  CHECK(report["pass"] == true);
  CHECK(report["command"] == "factorize");
}

TEST_CASE("reports are byte-identical for a fixed config and seed") {
  const auto dir = fresh_dir("determinism");
  const auto cfg = write_config(dir, {{"command", "factorize"},
                                      {"map",
                                       {{"kind", "twist"},
                                        {"amplitude", 0.4}}},
                                      {"n", 2},
                                      {"eps", 0.2},
                                      {"samples", 300},
                                      {"certificate_samples", 16},
                                      {"seed", 7}});
  REQUIRE(run_cli("--config " + cfg.string() + " --out " +
                  (dir / "a").string()) == 0);
  REQUIRE(run_cli("--config " + cfg.string() + " --out " +
                  (dir / "b").string()) == 0);
  const std::string a = slurp(dir / "a" / "report.json");
  const std::string b = slurp(dir / "b" / "report.json");
  CHECK(!a.empty());
  CHECK(a == b);

  const std::string csv_a = slurp(dir / "a" / "factors.csv");
  const std::string csv_b = slurp(dir / "b" / "factors.csv");
  CHECK(csv_a == csv_b);
}

TEST_CASE("spiral command reports the lower bound") {
  const auto dir = fresh_dir("spiral");
  const auto cfg = write_config(
      dir, {{"command", "spiral"}, {"k", 1.5}, {"alpha", 1.1}, {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["lower_bound_N_ceil"].get<int>() >= 4);
  CHECK(report["L"].get<double>() == doctest::Approx(2.0));
  CHECK(slurp(dir / "out" / "scan.csv").find("resolution,estimate") == 0);
}

TEST_CASE("onedim command factors the quadratic map") {
  const auto dir = fresh_dir("onedim");
  const auto cfg = write_config(dir, {{"command", "onedim"},
                                      {"map", {{"kind", "quadratic"}}},
                                      {"alpha", std::sqrt(2.0)},
                                      {"samples", 2000},
                                      {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["factor_count"] == 2);
  CHECK(report["residual"].get<double>() < 1e-8);
}

TEST_CASE("certify command emits one csv row per sample") {
  const auto dir = fresh_dir("certify");
  const int samples = 57;
  const auto cfg = write_config(dir, {{"command", "certify"},
                                      {"map",
                                       {{"kind", "twist"}, {"amplitude", 0.3}}},
                                      {"n", 2},
                                      {"samples", samples},
                                      {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  const std::string csv = slurp(dir / "out" / "samples.csv");
  // Header plus one row per sample.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == samples + 1);
}

TEST_CASE("path-bounds command checks the displacement bound") {
  const auto dir = fresh_dir("pathbounds");
  const auto cfg = write_config(dir, {{"command", "path-bounds"},
                                      {"map",
                                       {{"kind", "twist"}, {"amplitude", 0.3}}},
                                      {"n", 2},
                                      {"samples", 100},
                                      {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["displacement_bound_sound"] == true);
  CHECK(report["T"].get<double>() >= 1.0);
}

TEST_CASE("factorize a word with a trailing rotation") {
  const auto dir = fresh_dir("word");
  const auto cfg = write_config(
      dir,
      {{"command", "factorize"},
       {"map",
        {{"kind", "word"},
         {"terms",
          {{{"kind", "twist"}, {"amplitude", 0.15}},
           {{"kind", "rotation"}, {"angle", 0.5}, {"axis_point", {2.0, 0.0}}}}}}},
       {"n", 2},
       {"eps", 0.3},
       {"samples", 150},
       {"certificate_samples", 16},
       {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["j1"].get<int>() > 0);
  CHECK(report["j2"].get<int>() > 0);
  CHECK(report["pass"] == true);
}

TEST_CASE("thread count does not change results") {
  const auto dir = fresh_dir("threads");
  const auto cfg = write_config(dir, {{"command", "certify"},
                                      {"map",
                                       {{"kind", "twist"}, {"amplitude", 0.3}}},
                                      {"n", 2},
                                      {"samples", 200},
                                      {"seed", 7}});
  const std::string base = std::string(BILIP_CLI_PATH) + " --config " +
                           cfg.string();
  REQUIRE(std::system((base + " --out " + (dir / "one").string() +
                       " > /dev/null 2>&1").c_str()) == 0);
  REQUIRE(std::system(("BILIP_THREADS=4 " + base + " --out " +
                       (dir / "four").string() + " > /dev/null 2>&1").c_str()) ==
          0);
  CHECK(slurp(dir / "one" / "report.json") ==
        slurp(dir / "four" / "report.json"));
}

TEST_CASE("invalid configs exit with status 2") {
  const auto dir = fresh_dir("invalid");
  const auto bad_cmd = write_config(dir, {{"command", "decompose"}});
  CHECK(run_cli("--config " + bad_cmd.string()) == 2);

  const auto bad_eps = write_config(dir, {{"command", "factorize"},
                                          {"map", {{"kind", "identity"}}},
                                          {"eps", -1.0}});
  CHECK(run_cli("--config " + bad_eps.string()) == 2);

  CHECK(run_cli("--config /nonexistent/config.json") == 2);
}

TEST_CASE("out-of-scope inputs exit with status 3") {
  const auto dir = fresh_dir("oos");
  const auto cfg = write_config(dir, {{"command", "factorize"},
                                      {"map", {{"kind", "spiral"}, {"k", 1.5}}},
                                      {"n", 2},
                                      {"eps", 0.3},
                                      {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "out").string()) == 3);
}

TEST_CASE("unwritable output exits with status 4") {
  const auto dir = fresh_dir("unwritable");
  std::ofstream(dir / "blocker") << "file";
  const auto cfg = write_config(dir, {{"command", "spiral"},
                                      {"k", 1.5},
                                      {"alpha", 1.1},
                                      {"seed", 7}});
  CHECK(run_cli("--config " + cfg.string() + " --out " +
                (dir / "blocker" / "sub").string()) == 4);
}

}  // TEST_SUITE
