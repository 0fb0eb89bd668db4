#pragma once

#include <string>

#include "qregime/toml_lite.hpp"
#include "qregime/trainer.hpp"

namespace qregime {

ExperimentConfig config_from_toml(const TomlTable& toml);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON form of the effective config; recorded in manifests.
std::string config_to_json(const ExperimentConfig& config);

// FNV-1a 64 over the canonical form, hex encoded. Changes iff the effective
// config changes (comments and formatting do not count).
std::string config_digest(const ExperimentConfig& config);

} // namespace qregime
