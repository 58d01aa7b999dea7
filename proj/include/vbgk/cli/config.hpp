#pragma once

// Experiment configuration: JSON document with an `experiment` name, an
// `output_dir`, and one parameter block per experiment. Defaults are filled
// in first, then the config file, then --set overrides.

#include "vbgk/error.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace vbgk::cli {

using Json = nlohmann::ordered_json;

// Bad configuration; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

const std::vector<std::string>& experiment_names();

// Full default document for one experiment.
Json default_config(const std::string& experiment);

// Recursively overlays `patch` onto `base`. Keys absent from `base` are
// rejected with the dotted path of the offending key.
void merge_strict(Json& base, const Json& patch, const std::string& path = "");

// Applies KEY=VAL. KEY is a dotted path; a path not starting with a top-level
// key is taken relative to the experiment block. VAL is parsed as JSON when
// possible and otherwise kept as a string.
void apply_override(Json& config, const std::string& assignment);

// Defaults, then file (if non-empty), then overrides.
Json resolve_config(const std::string& experiment, const std::string& config_path,
                    const std::vector<std::string>& overrides);

}  // namespace vbgk::cli
