#include "matchsim.h"

#include <cstring>
#include <string>

#include "matchsim/algorithms.hpp"
#include "matchsim/config.hpp"
#include "matchsim/runner.hpp"
#include "matchsim/stats.hpp"
#include "matchsim/version.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct ms_config {
  matchsim::io::LoadedConfig loaded;
};

struct ms_market {
  matchsim::model::MarketRealization real;
  matchsim::core::PreferenceProfile profile;
};

struct ms_matching {
  matchsim::core::Matching matching;
};

extern "C" {

const char* ms_version(void) { return matchsim::kVersion; }

const char* ms_last_error(void) { return g_last_error.c_str(); }

void ms_string_free(char* s) { delete[] s; }

ms_config* ms_config_load(const char* path) {
  try {
    auto* config = new ms_config{matchsim::io::load_config(path)};
    return config;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ms_config* ms_config_parse(const char* json_text) {
  try {
    return new ms_config{matchsim::io::parse_config(json_text)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ms_config* ms_config_default(void) { return new ms_config{}; }

void ms_config_free(ms_config* config) { delete config; }

char* ms_config_canonical(const ms_config* config) {
  if (!config) return nullptr;
  return dup_string(matchsim::io::canonical_config(config->loaded));
}

uint64_t ms_config_hash(const ms_config* config) {
  return config ? matchsim::io::config_hash(config->loaded) : 0;
}

int ms_config_set_u64(ms_config* config, const char* key, uint64_t value) {
  if (!config || !key) return MS_ERR;
  const std::string k = key;
  if (k == "seed") {
    config->loaded.experiment.model.seed = value;
  } else if (k == "replications") {
    config->loaded.experiment.replications = static_cast<int>(value);
  } else if (k == "threads") {
    config->loaded.experiment.threads = static_cast<int>(value);
  } else {
    set_error("unknown u64 override: " + k);
    return MS_ERR;
  }
  return MS_OK;
}

int ms_config_set_string(ms_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return MS_ERR;
  const std::string k = key;
  if (k == "out_dir") {
    config->loaded.out_dir = value;
  } else if (k == "format") {
    const std::string v = value;
    if (v != "csv" && v != "jsonl" && v != "both") {
      set_error("format must be csv|jsonl|both");
      return MS_ERR_CONFIG;
    }
    config->loaded.format = v;
  } else {
    set_error("unknown string override: " + k);
    return MS_ERR;
  }
  return MS_OK;
}

int ms_run(const ms_config* config, const char* kind, char** manifest_json_out) {
  if (!config || !kind) {
    set_error("null config or kind");
    return MS_ERR_CONFIG;
  }
  try {
    matchsim::io::RunManifest manifest;
    const int status = matchsim::io::run(config->loaded, kind, &manifest);
    if (manifest_json_out) *manifest_json_out = dup_string(manifest.to_json());
    if (status == matchsim::io::kExitConfigError) set_error("unknown experiment kind or invalid config");
    if (status == matchsim::io::kExitAuditViolation) set_error("audit recorded violations");
    if (status == matchsim::io::kExitIoError) set_error("i/o failure while writing reports");
    return status;
  } catch (const matchsim::io::ConfigError& e) {
    set_error(e.what());
    return MS_ERR_CONFIG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return MS_ERR;
  }
}

int ms_example_fixtures(char** table_out) {
  try {
    std::string table;
    const bool ok = matchsim::io::example_fixtures(table);
    if (table_out) *table_out = dup_string(table);
    return ok ? MS_OK : MS_ERR_AUDIT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return MS_ERR;
  }
}

ms_market* ms_market_sample(const ms_config* config) {
  if (!config) {
    set_error("null config");
    return nullptr;
  }
  try {
    auto real = matchsim::model::sample_market(config->loaded.experiment.model);
    auto profile = matchsim::model::derive_profile(real);
    return new ms_market{std::move(real), std::move(profile)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void ms_market_free(ms_market* market) { delete market; }

int ms_market_num_students(const ms_market* market) {
  return market ? market->real.students() : -1;
}

int ms_market_num_colleges(const ms_market* market) {
  return market ? market->real.colleges() : -1;
}

ms_matching* ms_market_sosm(const ms_market* market) {
  if (!market) return nullptr;
  try {
    return new ms_matching{
        matchsim::algo::deferred_acceptance(market->profile, market->real.quotas)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ms_matching* ms_market_college_optimal(const ms_market* market) {
  if (!market) return nullptr;
  try {
    return new ms_matching{matchsim::algo::deferred_acceptance_college_proposing(
        market->profile, market->real.quotas)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void ms_matching_free(ms_matching* matching) { delete matching; }

int ms_matching_assignment(const ms_matching* matching, int32_t* out, size_t cap) {
  if (!matching || !out) return -1;
  const auto& assign = matching->matching.assignment();
  if (cap < assign.size()) {
    set_error("assignment buffer too small");
    return -1;
  }
  for (std::size_t i = 0; i < assign.size(); ++i) out[i] = assign[i];
  return static_cast<int>(assign.size());
}

int ms_matching_is_stable(const ms_market* market, const ms_matching* matching) {
  if (!market || !matching) return -1;
  try {
    return matchsim::core::is_stable(matching->matching, market->profile, market->real.quotas)
               ? 1
               : 0;
  } catch (const std::exception& e) {
    set_error(e.what());
    return -1;
  }
}

double ms_matching_frequency(const ms_matching* matching, int college) {
  if (!matching) return -1.0;
  const auto window = matchsim::stats::ObservationWindow::full(
      matching->matching.students(), matching->matching.colleges());
  return matchsim::stats::matching_frequency(matching->matching, window, college);
}

}  // extern "C"
