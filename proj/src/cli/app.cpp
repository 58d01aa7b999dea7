#include "vbgk/cli/app.hpp"

#include "vbgk/cli/config.hpp"
#include "vbgk/cli/experiments.hpp"
#include "vbgk/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <map>

#ifndef VBGK_VERSION
#define VBGK_VERSION "0.0.0"
#endif

namespace vbgk::cli {

namespace fs = std::filesystem;

const char* version() { return VBGK_VERSION; }

namespace {

void write_manifest(const fs::path& dir, const Json& config, double wall, const ExperimentResult& r) {
  Json m;
  m["experiment"] = config["experiment"];
  m["version"] = version();
  m["status"] = r.failed ? "numerical_failure" : "ok";
  if (r.failed) m["failure"] = r.failure;
  m["wall_time_s"] = wall;
  m["outputs"] = r.outputs;
  m["summary"] = r.summary;
  m["config"] = config;
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

std::string describe(const std::string& name) {
  static const std::map<std::string, std::string> text{
      {"bifurcation", "Equilibrium branch L_mu and its asymptotic defect"},
      {"homogeneous", "Spatially homogeneous flux ODE"},
      {"dispersion", "Symbol and invertibility sweep over (z, k)"},
      {"bounds", "Axis coefficients against their analytic bounds"},
      {"simulate", "Kinetic solver run with diagnostics and snapshots"},
      {"linear-decay", "Linearized run against the predicted decay rate"},
      {"entropy", "Regularized run with entropy envelope fit"},
  };
  const auto it = text.find(name);
  return it == text.end() ? std::string() : it->second;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vicsek-BGK experiments", "vbgk"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool quiet = false;
  for (const std::string& name : experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "KEY=VAL override (repeatable)")->take_all();
    sub->add_option("--output-dir", output_dir, "Directory for outputs");
    sub->add_flag("--quiet", quiet, "Only report errors");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  Json config;
  PreparedExperiment prepared;
  try {
    config = resolve_config(experiment, config_path, overrides);
    if (!output_dir.empty()) config["output_dir"] = output_dir;
    if (!config["output_dir"].is_string() || config["output_dir"].get<std::string>().empty()) {
      throw ConfigError("output_dir: expected a non-empty string");
    }
    prepared = prepare_experiment(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const fs::path dir = config["output_dir"].get<std::string>();
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(dir);
    ExperimentResult result = prepared.run(dir);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir, config, wall, result);
    if (result.failed) {
      err << "numerical failure: " << result.failure << "\n";
      return kExitNumerical;
    }
    if (!quiet) {
      out << experiment << ": wrote " << result.outputs.size() << " file(s) to " << dir.string() << "\n";
      out << result.summary.dump(2) << "\n";
    }
    return kExitOk;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    ExperimentResult failed;
    failed.failed = true;
    failed.failure = e.what();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
      write_manifest(dir, config, wall, failed);
    } catch (const std::exception&) {
    }
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace vbgk::cli
