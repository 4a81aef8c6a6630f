// Command-line front end for the matchsim shared library. Parsing stays
// here; everything else goes through the C API in matchsim.h.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "matchsim.h"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t replications = 0;
  bool replications_set = false;
  std::uint64_t threads = 0;
  bool threads_set = false;
};

int run_kind(const Options& opt, const std::string& kind) {
  ms_config* config = nullptr;
  if (!opt.config_path.empty()) {
    config = ms_config_load(opt.config_path.c_str());
  } else if (kind == "example-fixtures") {
    config = ms_config_default();
  } else {
    std::fprintf(stderr, "error: --config is required for %s\n", kind.c_str());
    return MS_ERR_CONFIG;
  }
  if (!config) {
    std::fprintf(stderr, "error: %s\n", ms_last_error());
    return MS_ERR_CONFIG;
  }

  int status = MS_OK;
  if (opt.seed_set) status = ms_config_set_u64(config, "seed", opt.seed);
  if (status == MS_OK && opt.replications_set)
    status = ms_config_set_u64(config, "replications", opt.replications);
  if (status == MS_OK && opt.threads_set)
    status = ms_config_set_u64(config, "threads", opt.threads);
  if (status == MS_OK && !opt.out_dir.empty())
    status = ms_config_set_string(config, "out_dir", opt.out_dir.c_str());
  if (status == MS_OK && !opt.format.empty())
    status = ms_config_set_string(config, "format", opt.format.c_str());
  if (status != MS_OK) {
    std::fprintf(stderr, "error: %s\n", ms_last_error());
    ms_config_free(config);
    return status;
  }

  char* manifest = nullptr;
  status = ms_run(config, kind.c_str(), &manifest);
  if (manifest) {
    std::fputs(manifest, stdout);
    ms_string_free(manifest);
  }
  if (status != MS_OK) std::fprintf(stderr, "error: %s\n", ms_last_error());
  ms_config_free(config);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("matchsim ") + ms_version() +
               " - stable matching market simulator and audit harness"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--config", opt.config_path, "Path to a JSON config")->envname("MATCHSIM_CONFIG");
  app.add_option("--out", opt.out_dir, "Output directory override")->envname("MATCHSIM_OUT");
  app.add_option("--format", opt.format, "Report format: csv|jsonl|both")
      ->envname("MATCHSIM_FORMAT");
  auto* seed_opt =
      app.add_option("--seed", opt.seed, "Seed override")->envname("MATCHSIM_SEED");
  auto* rep_opt = app.add_option("--replications", opt.replications, "Replication override")
                      ->envname("MATCHSIM_REPLICATIONS");
  auto* thread_opt =
      app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
          ->envname("MATCHSIM_THREADS");

  static const char* kinds[] = {"simulate",      "audit-bdc", "audit-equilibration",
                                "concentration", "estimators", "rankdiff",
                                "example-fixtures"};
  static const char* descriptions[] = {
      "Replication study of the configured statistic",
      "Single-student perturbation audit of displacement bounds",
      "Removal / re-stabilization audit",
      "Empirical tails vs the fitted concentration bound",
      "Estimator consistency sweep (CDF, rank association, kernel)",
      "Rank-difference scaling study",
      "Replay the worked five-student market"};
  for (std::size_t k = 0; k < 7; ++k)
    app.add_subcommand(kinds[k], descriptions[k])->fallthrough();

  CLI11_PARSE(app, argc, argv);

  opt.seed_set = seed_opt->count() > 0 || std::getenv("MATCHSIM_SEED") != nullptr;
  opt.replications_set = rep_opt->count() > 0 || std::getenv("MATCHSIM_REPLICATIONS") != nullptr;
  opt.threads_set = thread_opt->count() > 0 || std::getenv("MATCHSIM_THREADS") != nullptr;

  for (const auto* sub : app.get_subcommands())
    return run_kind(opt, sub->get_name());
  return MS_ERR_CONFIG;
}
