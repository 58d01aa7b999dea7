#include "vbgk/cli/config.hpp"

#include <fstream>

namespace vbgk::cli {

namespace {

Json solver_block(const std::string& mode, double mu, const std::string& init_kind) {
  Json b;
  b["mode"] = mode;
  b["mu"] = mu;
  b["gamma"] = 10.0;
  b["dt"] = 0.01;
  b["t_end"] = 40.0;
  b["nx"] = 32;
  b["ntheta"] = 64;
  b["snapshot_every"] = 10;
  b["seed"] = 0;
  b["eq_angle"] = 0.0;
  b["eps_reg"] = 0.1;
  b["dealias"] = true;
  b["field_snapshot_every"] = 0;
  b["fit_t_min"] = 10.0;
  b["fit_t_max"] = 40.0;
  Json init;
  init["kind"] = init_kind;
  init["mode"] = Json::array({1, 0});
  init["amplitude"] = 1e-2;
  init["blob_mass"] = 20.0;
  init["blob_width"] = 1.0;
  b["init"] = init;
  return b;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"bifurcation", "homogeneous", "dispersion", "bounds",
                                              "simulate",    "linear-decay", "entropy"};
  return names;
}

Json default_config(const std::string& experiment) {
  Json c;
  c["experiment"] = experiment;
  c["output_dir"] = "vbgk-out";
  Json b;
  if (experiment == "bifurcation") {
    b["d"] = 2;
    b["mu_min"] = 2.0;
    b["mu_max"] = 4.0;
    b["points"] = 101;
    b["tol"] = 1e-12;
  } else if (experiment == "homogeneous") {
    b["d"] = 2;
    b["mu"] = 2.5;
    b["L0"] = 0.01;
    b["angle"] = 0.0;
    b["t_end"] = 100.0;
    b["dt"] = 0.01;
    b["every"] = 10;
  } else if (experiment == "dispersion") {
    b["d"] = 2;
    b["mu"] = 1.0;
    b["gamma"] = 10.0;
    b["re_min"] = -0.05;
    b["re_max"] = 2.0;
    b["n_re"] = 9;
    b["im_max"] = 50.0;
    b["n_im"] = 201;
    b["k_max_factor"] = 5.0;
    b["write_points"] = true;
  } else if (experiment == "bounds") {
    b["d"] = 2;
    b["samples"] = 1000;
    b["seed"] = 0;
    b["gamma_min"] = 10.0;
    b["gamma_max"] = 50.0;
    b["re_max"] = 5.0;
    b["im_max"] = 100.0;
    b["eps"] = 0.0;  // 0 selects the module default
  } else if (experiment == "simulate") {
    b = solver_block("nonlinear", 2.2, "random-smooth");
  } else if (experiment == "linear-decay") {
    b = solver_block("linearized", 1.5, "random-smooth");
    b["dt"] = 0.02;
    b["t_end"] = 30.0;
    b["init"]["amplitude"] = 1.0;
    b["k_max_factor"] = 2.0;
  } else if (experiment == "entropy") {
    b = solver_block("regularized", 30.0, "large-blob");
    b["gamma"] = 1.0;
    b["t_end"] = 20.0;
    b["snapshot_every"] = 20;
    b["fit_t_min"] = 0.0;
    b["fit_t_max"] = 20.0;
  } else {
    throw ConfigError("experiment: unknown experiment '" + experiment + "'");
  }
  c[experiment] = b;
  return c;
}

void merge_strict(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key + ": unknown key");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects KEY=VAL, got '" + assignment + "'");
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  const std::string head = key.substr(0, key.find('.'));
  if (!config.contains(head)) key = config["experiment"].get<std::string>() + "." + key;

  // build a nested patch and merge it, so unknown keys are caught uniformly
  Json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while ((pos = rest.find('.')) != std::string::npos) {
    parts.push_back(rest.substr(0, pos));
    rest.erase(0, pos + 1);
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    Json wrap;
    wrap[*it] = std::move(patch);
    patch = std::move(wrap);
  }
  merge_strict(config, patch);
}

Json resolve_config(const std::string& experiment, const std::string& config_path,
                    const std::vector<std::string>& overrides) {
  Json config = default_config(experiment);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("--config: cannot open '" + config_path + "'");
    Json file = Json::parse(in, nullptr, false);
    if (file.is_discarded()) throw ConfigError("--config: '" + config_path + "' is not valid JSON");
    if (file.contains("experiment") && file["experiment"] != experiment) {
      throw ConfigError("experiment: config file is for '" + file["experiment"].dump() + "', subcommand is '" +
                        experiment + "'");
    }
    merge_strict(config, file);
  }
  for (const std::string& o : overrides) apply_override(config, o);
  if (config["experiment"] != experiment) throw ConfigError("experiment: cannot be changed by --set");
  return config;
}

}  // namespace vbgk::cli
