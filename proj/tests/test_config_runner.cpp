#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "matchsim/config.hpp"
#include "matchsim/runner.hpp"
#include "matchsim/serialize.hpp"

using namespace matchsim;
using namespace matchsim::io;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("matchsim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto config = parse_config(R"({"model": {"n": 50, "m": 2}})");
  CHECK(config.experiment.model.n == 50);
  CHECK(config.experiment.model.quotas.kind == model::QuotaRule::Kind::proportional);
  CHECK(config.experiment.model.sigma.kind == model::SigmaRule::Kind::schedule);
  CHECK(config.experiment.replications == 200);
  CHECK(config.out_dir == "out");
  CHECK(config.format == "both");
}

TEST_CASE("negative sigma is rejected") {
  CHECK_THROWS_AS(
      parse_config(R"({"model": {"n": 10, "m": 2, "sigma": {"rule": "fixed", "value": -0.5}}})"),
      ConfigError);
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    parse_config(R"({"model": {"n": 10, "m": 2, "bogus": 1}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("model.bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"modle": {}})"), ConfigError);
}

TEST_CASE("malformed json is a parse error with position info") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("bad enum values are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"model": {"n": 5, "m": 2, "eta": "cauchy"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"output": {"format": "xml"}})"), ConfigError);
}

TEST_CASE("canonical form round-trips") {
  const auto config = parse_config(
      R"({"experiment": {"replications": 77, "n_grid": [10, 20]},
          "model": {"n": 33, "m": 3, "seed": 99,
                     "outside": {"kind": "const", "value": "-inf"}},
          "output": {"dir": "somewhere", "format": "csv"}})");
  const std::string canon = canonical_config(config);
  const auto reloaded = parse_config(canon);
  CHECK(canonical_config(reloaded) == canon);
  CHECK(config_hash(reloaded) == config_hash(config));
  CHECK(reloaded.experiment.model.outside.value ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("config hash separates distinct configs") {
  const auto a = parse_config(R"({"model": {"seed": 1}})");
  const auto b = parse_config(R"({"model": {"seed": 2}})");
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("load_config reads from disk and reports missing files") {
  const auto dir = fresh_dir("loadcfg");
  const auto path = (dir / "config.json").string();
  std::ofstream(path) << R"({"model": {"n": 12, "m": 2}})";
  CHECK(load_config(path).experiment.model.n == 12);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
}

TEST_CASE("format_double emits shortest round-trip decimals") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.25) == "0.25");
  for (double v : {0.123456789012345, 3.0e-17, 12345.678}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("run dispatches simulate and writes reports plus a manifest") {
  auto config = parse_config(
      R"({"model": {"n": 30, "m": 2, "seed": 5},
          "experiment": {"replications": 20, "target_factor": 2}})");
  const auto dir = fresh_dir("simulate");
  config.out_dir = dir.string();
  RunManifest manifest;
  const int status = run(config, "simulate", &manifest);
  CHECK(status == kExitOk);
  CHECK(std::filesystem::exists(dir / "simulate_aggregate.csv"));
  CHECK(std::filesystem::exists(dir / "simulate_records.jsonl"));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(manifest.exit_status == 0);
  CHECK(manifest.kind == "simulate");
  CHECK(manifest.config_hash == config_hash(config));

  const std::string csv = slurp((dir / "simulate_aggregate.csv").string());
  CHECK(csv.find("college,mean_frequency,target,target_se,replications") == 0);
  const std::string jsonl = slurp((dir / "simulate_records.jsonl").string());
  CHECK(jsonl.find("replication_index") != std::string::npos);
  CHECK(jsonl.find("seed") != std::string::npos);
}

TEST_CASE("identical config and seed produce byte-identical reports") {
  const char* text =
      R"({"model": {"n": 40, "m": 2, "seed": 11},
          "experiment": {"replications": 30, "target_factor": 2}})";
  std::string bytes[2];
  for (int round = 0; round < 2; ++round) {
    auto config = parse_config(text);
    const auto dir = fresh_dir("determinism" + std::to_string(round));
    config.out_dir = dir.string();
    REQUIRE(run(config, "simulate") == kExitOk);
    bytes[round] = slurp((dir / "simulate_records.jsonl").string()) +
                   slurp((dir / "simulate_aggregate.csv").string());
  }
  CHECK(bytes[0] == bytes[1]);
}

TEST_CASE("unknown experiment kinds exit with the config error code") {
  auto config = parse_config(R"({"model": {"n": 10, "m": 2}})");
  config.out_dir = fresh_dir("badkind").string();
  CHECK(run(config, "no-such-kind") == kExitConfigError);
  CHECK(run(config, "") == kExitConfigError);
}

TEST_CASE("unwritable output directories exit with the io error code") {
  auto config = parse_config(R"({"model": {"n": 10, "m": 2}})");
  config.out_dir = "/proc/matchsim-cannot-write-here/x";
  CHECK(run(config, "simulate") == kExitIoError);
}

TEST_CASE("audit kinds run end to end with zero violations") {
  auto config = parse_config(
      R"({"model": {"n": 15, "m": 2, "seed": 3},
          "experiment": {"replications": 40, "n_grid": [10, 15],
                          "sigma_grid": [0.0, 0.1]}})");
  const auto dir = fresh_dir("auditbdc");
  config.out_dir = dir.string();
  RunManifest manifest;
  CHECK(run(config, "audit-bdc", &manifest) == kExitOk);
  CHECK(manifest.violations == 0);
  const std::string jsonl = slurp((dir / "audit-bdc_records.jsonl").string());
  CHECK(jsonl.find("\"violations\":0") != std::string::npos);
}

TEST_CASE("example fixtures replay matches the published tables") {
  std::string table;
  CHECK(example_fixtures(table));
  CHECK(table.find("NO") == std::string::npos);
  CHECK(table.find("changed_students,q=(1,2,2),5") != std::string::npos);
  CHECK(table.find("changed_students,q=(1,3,2),1") != std::string::npos);
}

TEST_CASE("realization fixtures round-trip through json and the columnar dump") {
  model::ModelConfig mc;
  mc.n = 17;
  mc.m = 3;
  mc.seed = 4242;
  mc.outside.kind = model::OutsideSpec::Kind::noise;
  mc.threshold.kind = model::ThresholdSpec::Kind::quantile;
  mc.threshold.p = 0.25;
  const auto real = model::sample_market(mc);

  const auto round_json = realization_from_json(realization_to_json(real));
  CHECK(round_json.X.data == real.X.data);
  CHECK(round_json.omega.data == real.omega.data);
  CHECK(round_json.c == real.c);
  CHECK(round_json.quotas.values == real.quotas.values);
  CHECK(round_json.outside_noise == real.outside_noise);

  const auto dir = fresh_dir("fixtures");
  const auto bin = (dir / "real.msrb").string();
  write_realization_binary(real, bin);
  const auto round_bin = read_realization_binary(bin);
  CHECK(round_bin.X.data == real.X.data);
  CHECK(round_bin.eps.data == real.eps.data);
  CHECK(round_bin.eta.data == real.eta.data);
  CHECK(round_bin.omega.data == real.omega.data);
  CHECK(round_bin.lambda == real.lambda);
  CHECK(round_bin.Z.data == real.Z.data);
  CHECK(round_bin.xi == real.xi);
  CHECK(round_bin.c == real.c);
  CHECK(round_bin.quotas.values == real.quotas.values);
  CHECK(round_bin.sigma_n == real.sigma_n);

  // The two deserialized realizations induce identical preference profiles.
  const auto p1 = model::derive_profile(round_json);
  const auto p2 = model::derive_profile(round_bin);
  for (int j = 1; j <= mc.m; ++j) CHECK(p1.college_list(j) == p2.college_list(j));

  CHECK_THROWS(read_realization_binary((dir / "missing.msrb").string()));
}

TEST_CASE("restabilization traces serialize one step per line") {
  algo::RestabTrace trace;
  trace.steps.push_back({core::BlockingPair{3, 2}, std::nullopt});
  trace.steps.push_back({core::BlockingPair{1, 1}, 4});
  const std::string jsonl = trace_to_jsonl(trace);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
  CHECK(jsonl.find("\"student\":3") != std::string::npos);
  CHECK(jsonl.find("\"displaced\":null") != std::string::npos);
  CHECK(jsonl.find("\"displaced\":4") != std::string::npos);
}
