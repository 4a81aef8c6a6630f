#include "matchsim/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "matchsim/algorithms.hpp"
#include "matchsim/version.hpp"

namespace matchsim::io {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string cell(double v) { return format_double(v); }
std::string cell(long v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }

struct Writers {
  bool csv = false;
  bool jsonl = false;
  std::string dir;
  std::vector<std::string> outputs;

  std::string csv_path(const std::string& kind) { return dir + "/" + kind + "_aggregate.csv"; }
  std::string jsonl_path(const std::string& kind) { return dir + "/" + kind + "_records.jsonl"; }
};

void write_jsonl(Writers& w, const std::string& kind, const std::vector<json>& records) {
  if (!w.jsonl) return;
  const std::string path = w.jsonl_path(kind);
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& r : records) out << r.dump() << '\n';
  w.outputs.push_back(path);
}

long run_simulate(const LoadedConfig& config, Writers& w) {
  const auto report = expt::simulate(config.experiment);
  if (w.csv) {
    CsvWriter csv(w.csv_path("simulate"),
                  {"college", "mean_frequency", "target", "target_se", "replications"});
    for (std::size_t j = 0; j < report.mean_frequency.size(); ++j)
      csv.row({cell(static_cast<int>(j)), cell(report.mean_frequency[j]),
               cell(report.target.value), cell(report.target.se),
               cell(config.experiment.replications)});
    w.outputs.push_back(w.csv_path("simulate"));
  }
  std::vector<json> records;
  records.reserve(report.records.size());
  for (const auto& r : report.records)
    records.push_back({{"replication_index", r.replication},
                       {"seed", r.seed},
                       {"theta", r.theta},
                       {"deviation", r.deviation}});
  write_jsonl(w, "simulate", records);
  return 0;
}

long run_concentration(const LoadedConfig& config, Writers& w) {
  const auto report = expt::concentration_profile(config.experiment);
  if (w.csv) {
    CsvWriter csv(w.csv_path("concentration"),
                  {"n", "sigma_n", "rms_deviation", "target", "target_se", "target_se_warning",
                   "t", "empirical_tail", "fitted_bound", "fitted_C"});
    for (std::size_t ci = 0; ci < report.cells.size(); ++ci) {
      const auto& c = report.cells[ci];
      for (std::size_t ti = 0; ti < report.t_grid.size(); ++ti)
        csv.row({cell(c.n), cell(c.sigma_n), cell(c.rms_deviation), cell(c.target.value),
                 cell(c.target.se), cell(static_cast<int>(c.target_se_warning)),
                 cell(report.t_grid[ti]), cell(c.tail[ti]), cell(report.bound[ci][ti]),
                 cell(report.fitted_C)});
    }
    w.outputs.push_back(w.csv_path("concentration"));
  }
  std::vector<json> records;
  for (const auto& c : report.cells)
    for (const auto& r : c.records)
      records.push_back({{"replication_index", r.replication},
                         {"seed", r.seed},
                         {"n", c.n},
                         {"theta", r.theta},
                         {"deviation", r.deviation}});
  write_jsonl(w, "concentration", records);
  return report.bound_violations;  // reported, not an audit violation
}

long run_audit_bdc(const LoadedConfig& config, Writers& w) {
  const auto report = expt::bounded_difference_audit(config.experiment);
  if (w.csv) {
    CsvWriter csv(w.csv_path("audit-bdc"),
                  {"trials", "violations", "max_k", "max_sosm_change", "max_cross_change"});
    int max_k = 0, max_sosm = 0, max_cross = 0;
    for (const auto& r : report.records) {
      max_k = std::max(max_k, r.k);
      max_sosm = std::max(max_sosm, r.sosm_max_change);
      max_cross = std::max(max_cross, r.cross_max_change);
    }
    csv.row({cell(report.trials), cell(report.violations), cell(max_k), cell(max_sosm),
             cell(max_cross)});
    w.outputs.push_back(w.csv_path("audit-bdc"));
  }
  std::vector<json> records;
  for (const auto& r : report.records)
    records.push_back({{"replication_index", r.trial},
                       {"seed", r.seed},
                       {"n", r.n},
                       {"sigma", r.sigma},
                       {"k", r.k},
                       {"sosm_max_change", r.sosm_max_change},
                       {"sosm_total_changed", r.sosm_total_changed},
                       {"sosm_vs_copt_max", r.sosm_vs_copt_max},
                       {"cross_max_change", r.cross_max_change},
                       {"violations", r.violations}});
  write_jsonl(w, "audit-bdc", records);
  return report.violations;
}

long run_audit_equilibration(const LoadedConfig& config, Writers& w) {
  const auto report = expt::equilibration_audit(config.experiment);
  if (w.csv) {
    CsvWriter csv(w.csv_path("audit-equilibration"), {"trials", "violations"});
    csv.row({cell(report.trials), cell(report.violations)});
    w.outputs.push_back(w.csv_path("audit-equilibration"));
  }
  std::vector<json> records;
  for (const auto& r : report.records)
    records.push_back({{"replication_index", r.trial},
                       {"seed", r.seed},
                       {"n", r.n},
                       {"m", r.m},
                       {"sigma", r.sigma},
                       {"removed_student", r.removed_student},
                       {"k", r.k},
                       {"equilibrated", r.equilibrated},
                       {"max_nj1", r.max_nj1},
                       {"max_nj0", r.max_nj0},
                       {"changed_students", r.changed_students},
                       {"fill_delta_colleges", r.fill_delta_colleges},
                       {"violations", r.violations}});
  write_jsonl(w, "audit-equilibration", records);
  return report.violations;
}

long run_rankdiff(const LoadedConfig& config, Writers& w) {
  const auto report = expt::rank_difference_scaling(config.experiment);
  if (w.csv) {
    CsvWriter csv(w.csv_path("rankdiff"),
                  {"n", "sigma", "mean_h", "se_h", "lower_bound", "nontrivial", "violation"});
    for (const auto& c : report.cells)
      csv.row({cell(c.n), cell(c.sigma), cell(c.mean_h), cell(c.se_h), cell(c.lower_bound),
               cell(static_cast<int>(c.nontrivial)), cell(static_cast<int>(c.violation))});
    w.outputs.push_back(w.csv_path("rankdiff"));
  }
  std::vector<json> records;
  for (const auto& c : report.cells)
    records.push_back({{"n", c.n},
                       {"sigma", c.sigma},
                       {"mean_h", c.mean_h},
                       {"se_h", c.se_h},
                       {"lower_bound", c.lower_bound},
                       {"nontrivial", c.nontrivial},
                       {"violation", c.violation}});
  write_jsonl(w, "rankdiff", records);
  return report.violations;
}

long run_estimators(const LoadedConfig& config, Writers& w) {
  const auto report = expt::estimator_consistency_sweep(config.experiment);
  if (w.csv) {
    CsvWriter csv(w.csv_path("estimators"),
                  {"n", "median_sup_cdf_err", "median_rho_err", "median_kernel_err", "rho_oracle",
                   "rho_at_largest"});
    for (const auto& c : report.cells)
      csv.row({cell(c.n), cell(c.median_sup_cdf_err), cell(c.median_rho_err),
               cell(c.median_kernel_err), cell(report.rho_oracle), cell(report.rho_at_largest)});
    w.outputs.push_back(w.csv_path("estimators"));
  }
  std::vector<json> records;
  for (const auto& c : report.cells)
    records.push_back({{"n", c.n},
                       {"median_sup_cdf_err", c.median_sup_cdf_err},
                       {"median_rho_err", c.median_rho_err},
                       {"median_kernel_err", c.median_kernel_err}});
  write_jsonl(w, "estimators", records);
  return 0;
}

}  // namespace

std::string RunManifest::to_json() const {
  json j;
  j["artifact_version"] = artifact_version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["kind"] = kind;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["outputs"] = outputs;
  j["violations"] = violations;
  j["exit_status"] = exit_status;
  return j.dump(2) + "\n";
}

int run(const LoadedConfig& config, const std::string& kind_arg, RunManifest* manifest_out) {
  RunManifest manifest;
  manifest.artifact_version = kVersion;
  manifest.config_hash = config_hash(config);
  manifest.seed = config.experiment.model.seed;
  manifest.kind = kind_arg.empty() ? config.experiment.kind : kind_arg;
  manifest.started_at = now_iso8601();

  if (manifest.kind.empty()) {
    if (manifest_out) *manifest_out = manifest;
    return kExitConfigError;
  }

  Writers writers;
  writers.csv = config.format == "csv" || config.format == "both";
  writers.jsonl = config.format == "jsonl" || config.format == "both";
  writers.dir = config.out_dir;

  int status = kExitOk;
  try {
    std::filesystem::create_directories(writers.dir);
    long violations = 0;
    if (manifest.kind == "simulate") {
      violations = run_simulate(config, writers);
    } else if (manifest.kind == "concentration") {
      violations = run_concentration(config, writers);
      violations = 0;  // shape diagnostics only
    } else if (manifest.kind == "audit-bdc") {
      violations = run_audit_bdc(config, writers);
    } else if (manifest.kind == "audit-equilibration") {
      violations = run_audit_equilibration(config, writers);
    } else if (manifest.kind == "rankdiff") {
      violations = run_rankdiff(config, writers);
    } else if (manifest.kind == "estimators") {
      violations = run_estimators(config, writers);
    } else if (manifest.kind == "example-fixtures") {
      std::string table;
      const bool ok = example_fixtures(table);
      const std::string path = writers.dir + "/example-fixtures.txt";
      std::ofstream out(path, std::ios::app);
      if (!out) throw std::filesystem::filesystem_error("cannot open", path, {});
      out << table;
      writers.outputs.push_back(path);
      violations = ok ? 0 : 1;
    } else {
      status = kExitConfigError;
    }
    if (status == kExitOk && violations > 0) status = kExitAuditViolation;
    manifest.violations = violations;
  } catch (const std::filesystem::filesystem_error&) {
    status = kExitIoError;
  } catch (const std::runtime_error&) {
    status = kExitIoError;
  }

  manifest.finished_at = now_iso8601();
  manifest.exit_status = status;
  manifest.outputs = writers.outputs;
  if (status != kExitConfigError) {
    std::ofstream mf(writers.dir + "/manifest.json", std::ios::app);
    if (mf) mf << manifest.to_json();
  }
  if (manifest_out) *manifest_out = manifest;
  return status;
}

bool example_fixtures(std::string& table_out) {
  using core::Matching;
  using core::PreferenceProfile;
  using core::Quotas;

  const std::vector<std::vector<int>> students = {
      {1, 2, 3, 0}, {2, 3, 1, 0}, {2, 3, 1, 0}, {3, 1, 2, 0}, {3, 2, 1, 0}};
  std::vector<std::vector<int>> students_perturbed = students;
  students_perturbed[0] = {2, 3, 1, 0};
  const std::vector<std::vector<int>> colleges = {
      {1, 4, 2, 3, 5, 0}, {1, 5, 2, 3, 4, 0}, {2, 3, 4, 5, 1, 0}};

  const PreferenceProfile base(students, colleges);
  const PreferenceProfile perturbed(students_perturbed, colleges);

  struct Case {
    const char* name;
    Quotas quotas;
    const PreferenceProfile* profile;
    std::vector<int> expected;
  };
  const std::vector<Case> cases = {
      {"q=(1,2,2) base", Quotas{{1, 2, 2}}, &base, {1, 2, 2, 3, 3}},
      {"q=(1,2,2) perturbed", Quotas{{1, 2, 2}}, &perturbed, {2, 3, 3, 1, 2}},
      {"q=(1,3,2) base", Quotas{{1, 3, 2}}, &base, {1, 2, 2, 3, 3}},
      {"q=(1,3,2) perturbed", Quotas{{1, 3, 2}}, &perturbed, {2, 2, 2, 3, 3}},
  };

  std::ostringstream out;
  out << "case,student,assigned,expected,match\n";
  bool all_ok = true;
  for (const auto& c : cases) {
    const Matching mu = algo::deferred_acceptance(*c.profile, c.quotas);
    for (int i = 0; i < 5; ++i) {
      const bool ok = mu.of(i) == c.expected[i];
      all_ok = all_ok && ok;
      out << c.name << ",i" << (i + 1) << ",j" << mu.of(i) << ",j" << c.expected[i] << ","
          << (ok ? "yes" : "NO") << "\n";
    }
  }
  // The two quota variants differ by how far one student's report change
  // propagates: with q=(1,2,2) every student moves, with q=(1,3,2) only one.
  const Matching tight_base = algo::deferred_acceptance(base, cases[0].quotas);
  const Matching tight_pert = algo::deferred_acceptance(perturbed, cases[0].quotas);
  const Matching slack_base = algo::deferred_acceptance(base, cases[2].quotas);
  const Matching slack_pert = algo::deferred_acceptance(perturbed, cases[2].quotas);
  out << "changed_students,q=(1,2,2)," << algo::perturbation_diff(tight_base, tight_pert, 0).total_changed_students << "\n";
  out << "changed_students,q=(1,3,2)," << algo::perturbation_diff(slack_base, slack_pert, 0).total_changed_students << "\n";
  table_out = out.str();
  return all_ok;
}

}  // namespace matchsim::io
