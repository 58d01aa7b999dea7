#pragma once

#include "vbgk/cli/config.hpp"
#include "vbgk/kinetic.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace vbgk::cli {

struct ExperimentResult {
  std::vector<std::string> outputs;  // file names relative to the output directory
  Json summary = Json::object();
  bool failed = false;               // numerical failure; maps to exit code 1
  std::string failure;
};

// Validated, ready-to-run experiment. Construction performs all parameter
// checks and throws ConfigError naming the offending key; run() does the work.
struct PreparedExperiment {
  std::string name;
  std::function<ExperimentResult(const std::filesystem::path& out_dir)> run;
};

PreparedExperiment prepare_experiment(const Json& config);

// Typed view of a solver parameter block.
SolverConfig solver_config_from_json(const Json& block, const std::string& path);

}  // namespace vbgk::cli
