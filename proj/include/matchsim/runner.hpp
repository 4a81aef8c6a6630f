#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matchsim/config.hpp"

namespace matchsim::io {

// Exit-code contract shared by run() and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAuditViolation = 3;
inline constexpr int kExitIoError = 4;

struct RunManifest {
  std::string artifact_version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string kind;
  std::string started_at;   // the only non-deterministic fields live here
  std::string finished_at;
  std::vector<std::string> outputs;
  long violations = 0;
  int exit_status = 0;

  std::string to_json() const;
};

// Dispatches the experiment named by `kind` (or config.experiment.kind when
// empty), writes CSV aggregates / JSONL records / manifest.json under
// out_dir, and returns the exit status.
int run(const LoadedConfig& config, const std::string& kind, RunManifest* manifest_out = nullptr);

// Replays the two quota variants of the worked five-student market and
// returns a comparison table; false on any mismatch with the expected
// matchings.
bool example_fixtures(std::string& table_out);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace matchsim::io
