// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit status is nonzero if any criterion fails. Optional argv filters run a
// subset by number, e.g. `acceptance 1 4 9`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "matchsim/algorithms.hpp"
#include "matchsim/config.hpp"
#include "matchsim/experiments.hpp"
#include "matchsim/runner.hpp"
#include "test_util.hpp"

using namespace matchsim;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

// --- Criterion 1: golden examples ------------------------------------------

Outcome golden_examples() {
  Outcome out;
  const auto base = testutil::example_market();
  const auto perturbed = testutil::example_market_perturbed();

  const core::Matching tight = algo::deferred_acceptance(base, core::Quotas{{1, 2, 2}});
  out.require(tight == core::Matching({1, 2, 2, 3, 3}, 3), "base q=(1,2,2) mismatch");

  const core::Matching tight_p = algo::deferred_acceptance(perturbed, core::Quotas{{1, 2, 2}});
  out.require(tight_p == core::Matching({2, 3, 3, 1, 2}, 3), "perturbed q=(1,2,2) mismatch");

  const core::Matching slack = algo::deferred_acceptance(base, core::Quotas{{1, 3, 2}});
  const core::Matching slack_p = algo::deferred_acceptance(perturbed, core::Quotas{{1, 3, 2}});
  int changed = 0;
  for (int i = 0; i < 5; ++i) changed += slack.of(i) != slack_p.of(i);
  out.require(changed == 1 && slack.of(0) != slack_p.of(0),
              "q=(1,3,2) perturbation must move exactly the perturbed student");
  return out;
}

// --- Criterion 2: brute-force oracle equivalence ----------------------------

Outcome oracle_equivalence() {
  Outcome out;
  Rng rng(20240001);
  long violations = 0;
  const int markets = 1000;
  for (int trial = 0; trial < markets; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(6));  // up to 7
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng, trial % 2 == 0);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const auto stable_set = core::enumerate_stable_matchings(profile, quotas);
    const core::Matching sosm = algo::deferred_acceptance(profile, quotas);
    const core::Matching copt = algo::deferred_acceptance_college_proposing(profile, quotas);

    if (std::count(stable_set.begin(), stable_set.end(), sosm) != 1) ++violations;
    if (std::count(stable_set.begin(), stable_set.end(), copt) != 1) ++violations;
    for (const auto& mu : stable_set)
      for (int i = 0; i < n; ++i)
        if (profile.student_rank(i, sosm.of(i)) > profile.student_rank(i, mu.of(i))) ++violations;

    const auto [restab, trace] = algo::restabilize(sosm, profile, quotas);
    if (!(restab == sosm) || trace.iterations() != 0) ++violations;

    const auto& first = stable_set.front();
    std::set<int> matched_first;
    for (int i = 0; i < n; ++i)
      if (first.of(i) != 0) matched_first.insert(i);
    for (const auto& mu : stable_set) {
      for (core::CollegeId j = 1; j <= m; ++j)
        if (mu.fill(j) != first.fill(j)) ++violations;
      std::set<int> matched;
      for (int i = 0; i < n; ++i)
        if (mu.of(i) != 0) matched.insert(i);
      if (matched != matched_first) ++violations;
    }
  }
  out.require(violations == 0, "oracle sweep violations: " + std::to_string(violations));
  return out;
}

// --- Criterion 3: equilibration audit ---------------------------------------

Outcome equilibration() {
  Outcome out;
  expt::ExperimentConfig ec;
  ec.model.m = 3;
  ec.model.seed = 30003;
  ec.replications = 5400;  // 300 per (n, m, sigma) cell
  ec.n_grid = {20, 100, 500};
  ec.m_grid = {3, 10};
  ec.sigma_grid = {0.0, 0.01, 0.1};
  const auto report = expt::equilibration_audit(ec);
  long not_equilibrated = 0;
  for (const auto& rec : report.records) not_equilibrated += !rec.equilibrated;
  out.require(report.trials >= 5000, "trial count");
  out.require(not_equilibrated == 0,
              std::to_string(not_equilibrated) + " trials failed exact equilibration");
  out.require(report.violations == 0,
              "displacement bound violations: " + std::to_string(report.violations));
  return out;
}

// --- Criterion 4: bounded difference audit ----------------------------------

Outcome bounded_difference() {
  Outcome out;
  expt::ExperimentConfig ec;
  ec.model.m = 3;
  ec.model.seed = 40004;
  ec.replications = 10008;  // 1112 per (n, sigma) cell
  ec.n_grid = {50, 200, 1000};
  ec.sigma_grid = {0.0, 0.02, 0.1};
  ec.audit_college_optimal = true;
  const auto report = expt::bounded_difference_audit(ec);
  out.require(report.trials >= 10000, "trial count");
  out.require(report.violations == 0,
              "bound violations: " + std::to_string(report.violations));
  return out;
}

// --- Criteria 5 and 6: LLN scaling and concentration shape ------------------

expt::ExperimentConfig lln_config(bool sigma_zero) {
  expt::ExperimentConfig ec;
  ec.model.n = 500;
  ec.model.m = 2;
  ec.model.seed = 50005;
  ec.model.quotas.fill = 1.0;  // ample seats: deviations scale like n^-1/2
  if (sigma_zero) {
    ec.model.sigma.kind = model::SigmaRule::Kind::fixed;
    ec.model.sigma.value = 0.0;
  }
  ec.replications = 2000;
  ec.target_factor = 20;
  ec.n_grid = {500, 2000, 8000};
  ec.t_grid = {0.005, 0.01, 0.02, 0.04, 0.08};
  ec.statistic.kind = expt::StatisticSelector::Kind::college_frequency;
  ec.statistic.college = 1;
  ec.fit_n = 500;
  return ec;
}

Outcome lln_behaviour(const expt::ConcentrationReport& schedule,
                      const expt::ConcentrationReport& homogeneous) {
  Outcome out;
  out.require(schedule.cells.size() == 3, "grid size");
  for (std::size_t i = 1; i < schedule.cells.size(); ++i)
    out.require(schedule.cells[i].rms_deviation < schedule.cells[i - 1].rms_deviation,
                "schedule RMS not strictly decreasing at n=" +
                    std::to_string(schedule.cells[i].n));
  const double ratio =
      homogeneous.cells.back().rms_deviation / homogeneous.cells.front().rms_deviation;
  out.require(ratio >= 0.2 && ratio <= 0.6,
              "sigma=0 RMS ratio " + io::format_double(ratio) + " outside [0.2, 0.6]");
  if (out.pass) out.detail = "sigma=0 RMS ratio " + io::format_double(ratio);
  return out;
}

Outcome concentration_shape(const expt::ConcentrationReport& report) {
  Outcome out;
  out.require(report.fitted_C > 0, "fitted C must be positive");
  out.require(report.bound_violations == 0,
              "fitted bound undercuts a tail " + std::to_string(report.bound_violations) +
                  " times");
  for (const auto& cell : report.cells)
    for (std::size_t t = 1; t < cell.tail.size(); ++t)
      out.require(cell.tail[t] <= cell.tail[t - 1],
                  "tail not monotone at n=" + std::to_string(cell.n));
  if (out.pass) out.detail = "C fitted at n=500: " + io::format_double(report.fitted_C);
  return out;
}

// --- Criterion 7: rank difference scaling -----------------------------------

Outcome rank_difference() {
  Outcome out;
  expt::ExperimentConfig ec;
  ec.model.m = 3;
  ec.model.seed = 70007;
  ec.replications = 200;
  ec.n_grid = {100, 400, 1600};
  ec.sigma_grid = {0.0, 0.05, 0.1};
  const auto report = expt::rank_difference_scaling(ec);
  out.require(report.violations == 0, "violations: " + std::to_string(report.violations));
  for (const auto& cell : report.cells) {
    if (cell.sigma == 0.0)
      out.require(cell.mean_h == 0.0, "h must vanish at sigma=0, n=" + std::to_string(cell.n));
    if (cell.nontrivial)
      out.require(cell.mean_h >= cell.lower_bound - 3.0 * cell.se_h,
                  "lower bound broken at n=" + std::to_string(cell.n));
  }
  // Growth in n at fixed positive sigma (the bound is linear in n-2).
  for (double sigma : {0.05, 0.1}) {
    double prev = -1.0;
    for (const auto& cell : report.cells)
      if (cell.sigma == sigma) {
        out.require(cell.mean_h >= prev, "mean h not nondecreasing in n");
        prev = cell.mean_h;
      }
  }

  expt::ExperimentConfig single = ec;
  single.model.m = 1;
  single.statistic.college = 1;
  single.n_grid = {200};
  single.sigma_grid = {0.2};
  const auto single_report = expt::rank_difference_scaling(single);
  out.require(single_report.cells.front().mean_h == 0.0, "h must vanish when m=1");
  return out;
}

// --- Criterion 8: estimator consistency -------------------------------------

Outcome estimator_consistency() {
  Outcome out;
  expt::ExperimentConfig ec;
  ec.model.m = 2;
  ec.model.seed = 80008;
  ec.model.quotas.fill = 1.0;
  ec.model.sigma.kind = model::SigmaRule::Kind::fixed;
  ec.model.sigma.value = 0.0;
  ec.replications = 500;
  ec.n_grid = {250, 1000, 4000};
  ec.bandwidth_exponent = -0.2;  // h = n^-1/5 for d = 1
  ec.probe_points = {0.25, 0.5, 0.75};
  const auto report = expt::estimator_consistency_sweep(ec);
  out.require(report.monotone_cdf, "median sup-norm CDF error not decreasing");
  out.require(report.monotone_rho, "median rank-association error not decreasing");
  out.require(report.monotone_kernel, "median kernel error not decreasing");

  // Aligned single-index fixture: deterministic sorting, 10x oracle.
  model::ModelConfig aligned;
  aligned.m = 4;
  aligned.seed = 80108;
  aligned.eps_scale = 0.0;
  aligned.outside.value = -kInf;
  aligned.quotas.kind = model::QuotaRule::Kind::proportional;
  aligned.quotas.fill = 1.0;
  aligned.sigma.kind = model::SigmaRule::Kind::fixed;
  aligned.sigma.value = 0.0;

  const auto rho_at = [&](int n, std::uint64_t rep, Matrix* x_out, core::Matching* mu_out,
                          Matrix* z_out) {
    model::ModelConfig mc = aligned;
    mc.n = n;
    Rng crng = model::college_stream(mc.seed);
    const auto side = model::sample_college_side(mc, crng);
    Rng srng = model::student_stream(mc.seed, rep);
    const auto real = model::sample_students_given(mc, side, n, srng);
    const auto mu = algo::deferred_acceptance(model::derive_profile(real), real.quotas);
    const double rho = stats::spearman_rho_hat(
        mu, real.X, real.Z, stats::ObservationWindow::full(n, mc.m), 0, 0);
    if (x_out) *x_out = real.X;
    if (z_out) *z_out = real.Z;
    if (mu_out) *mu_out = mu;
    return rho;
  };

  Matrix x_small;
  Matrix z_small;
  core::Matching mu_small;
  const double rho_small = rho_at(4000, 1, &x_small, &mu_small, &z_small);
  const double rho_oracle = rho_at(40000, 2, nullptr, nullptr, nullptr);
  out.require(std::abs(rho_small - rho_oracle) <= 0.05,
              "aligned-fixture estimate " + io::format_double(rho_small) + " vs oracle " +
                  io::format_double(rho_oracle));

  // Exact invariance under a strictly increasing transform of X.
  Matrix transformed = x_small;
  for (double& v : transformed.data) v = std::exp(2.0 * v) + v * v * v;
  const double rho_transformed = stats::spearman_rho_hat(
      mu_small, transformed, z_small, stats::ObservationWindow::full(4000, 4), 0, 0);
  out.require(rho_transformed == rho_small, "rank statistic moved under a monotone transform");
  return out;
}

// --- Criterion 9: determinism and performance -------------------------------

Outcome determinism_and_performance() {
  Outcome out;

  const char* text =
      R"({"model": {"n": 200, "m": 3, "seed": 90009},
          "experiment": {"replications": 50, "target_factor": 2}})";
  std::string bytes[2];
  for (int round = 0; round < 2; ++round) {
    auto config = io::parse_config(text);
    const auto dir = std::filesystem::temp_directory_path() /
                     ("matchsim_acceptance_" + std::to_string(round));
    std::filesystem::remove_all(dir);
    config.out_dir = dir.string();
    if (io::run(config, "simulate") != io::kExitOk) {
      out.require(false, "simulate run failed");
      return out;
    }
    for (const char* name : {"simulate_records.jsonl", "simulate_aggregate.csv"}) {
      std::ifstream in(dir / name);
      std::stringstream ss;
      ss << in.rdbuf();
      bytes[round] += ss.str();
    }
  }
  out.require(bytes[0] == bytes[1], "same config+seed produced different report bytes");

  model::ModelConfig big;
  big.n = 100000;
  big.m = 50;
  big.seed = 424242;
  big.quotas.fill = 0.9;
  const auto real = model::sample_market(big);
  const auto profile = model::derive_profile(real);
  const auto start = Clock::now();
  const auto mu = algo::deferred_acceptance(profile, real.quotas);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out.require(seconds < 5.0,
              "deferred acceptance took " + io::format_double(seconds) + "s at n=1e5, m=50");
  out.require(core::validate_matching(mu, real.quotas).ok, "large matching invalid");
  if (out.pass) out.detail = "DA at n=1e5, m=50: " + io::format_double(seconds) + "s";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> filter;
  for (int a = 1; a < argc; ++a) filter.insert(std::atoi(argv[a]));
  const auto wanted = [&](int id) { return filter.empty() || filter.count(id) > 0; };

  int failures = 0;
  const auto report = [&](int id, const char* name, const Outcome& o, double seconds) {
    std::printf("[%s] %d %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, seconds,
                o.detail.empty() ? "" : " - ", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  const auto timeit = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    if (!wanted(id)) return;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    report(id, name, o, std::chrono::duration<double>(Clock::now() - start).count());
  };

  timeit(1, "golden-examples", golden_examples);
  timeit(2, "oracle-equivalence", oracle_equivalence);
  timeit(3, "equilibration", equilibration);
  timeit(4, "bounded-difference", bounded_difference);

  if (wanted(5) || wanted(6)) {
    const auto start = Clock::now();
    Outcome lln;
    Outcome shape;
    try {
      const auto schedule = expt::concentration_profile(lln_config(false));
      const auto homogeneous = expt::concentration_profile(lln_config(true));
      lln = lln_behaviour(schedule, homogeneous);
      shape = concentration_shape(schedule);
    } catch (const std::exception& e) {
      lln.pass = shape.pass = false;
      lln.detail = shape.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (wanted(5)) report(5, "lln-scaling", lln, secs);
    if (wanted(6)) report(6, "concentration-shape", shape, secs);
  }

  timeit(7, "rank-difference-scaling", rank_difference);
  timeit(8, "estimator-consistency", estimator_consistency);
  timeit(9, "determinism-performance", determinism_and_performance);

  return failures == 0 ? 0 : 1;
}
