#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "matchsim/experiments.hpp"

namespace matchsim::io {

// Thrown for parse failures and schema violations; the message enumerates
// every offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LoadedConfig {
  expt::ExperimentConfig experiment;
  std::string out_dir = "out";
  std::string format = "both";  // csv | jsonl | both
};

LoadedConfig load_config(const std::string& path);
LoadedConfig parse_config(const std::string& json_text);

// Sorted-key re-emission with defaults materialized; reloading the canonical
// form yields an equal config.
std::string canonical_config(const LoadedConfig& config);

std::uint64_t config_hash(const LoadedConfig& config);  // FNV-1a of the canonical form

}  // namespace matchsim::io
