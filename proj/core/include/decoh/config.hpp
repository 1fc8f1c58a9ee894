#pragma once

// Experiment configuration files.
//
// Plain-text form, one `key = value` per line, `#` starts a comment:
//
//   [schwinger]
//   n_sites = 8
//   couplings.sigma = 1.5     # dotted keys work anywhere
//
// A key that is unique among all leaf names may be written bare
// (`n_sites = 8`). JSON with the same tree is accepted as well; the format is
// picked from the first non-blank character.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "decoh/experiments.hpp"

namespace decoh {

/// Thrown for schema violations; what() starts with the dotted field name.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Canonical plain-text form: every key, sorted, full precision. Parsing it
/// back gives an equal config.
std::string serialize_config(const ExperimentConfig& config);

/// Hex FNV-1a digest of serialize_config.
std::string config_hash(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Every accepted dotted key.
const std::vector<std::string>& config_keys();

}  // namespace decoh
