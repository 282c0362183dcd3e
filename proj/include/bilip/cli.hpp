// Command-line surface: config parsing, pipeline orchestration, and report
// emission. Reports are deterministic for a fixed config and seed; wall
// time goes to a sidecar so report files stay byte-stable.
#pragma once

#include "bilip/factorize.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace bilip::cli {

// Exit codes: 0 success, 2 invalid config, 3 out-of-scope input,
// 4 unwritable output path.
enum ExitCode {
  kOk = 0,
  kInvalidConfig = 2,
  kOutOfScope = 3,
  kOutputError = 4,
};

struct RunConfig {
  std::string command;  // factorize | certify | path-bounds | onedim | spiral
  nlohmann::json map_spec;
  int dim = 2;
  double eps = 0.2;
  double alpha = std::sqrt(2.0);     // onedim, spiral
  double spiral_k = 1.5;
  int samples = 1000;
  int certificate_samples = 32;
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = ".";
  nlohmann::json echo;  // raw config, echoed into the report
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Catalog map construction by name and parameters.
factorize::SphereMap map_from_spec(const nlohmann::json& spec, int dim);

struct RunResult {
  int exit_code = kOk;
  nlohmann::json report;
  std::string message;
  double wall_seconds = 0.0;
};

// Dispatches to the named module, writes report.json, command CSVs and the
// timing sidecar under the output directory.
RunResult run(const RunConfig& config);

}  // namespace bilip::cli
