#include "matchsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "matchsim/algorithms.hpp"
#include "matchsim/parallel.hpp"

namespace matchsim::expt {

namespace {

stats::StatisticSpec make_spec(const StatisticSelector& sel, int m) {
  switch (sel.kind) {
    case StatisticSelector::Kind::college_frequency:
    case StatisticSelector::Kind::matched_fraction:
      return stats::StatisticSpec::indicator(m);
    case StatisticSelector::Kind::x_below: {
      const double cut = sel.x_cut;
      return stats::StatisticSpec::x_in_set(
          m, [cut](std::span<const double> x) { return x[0] <= cut; });
    }
  }
  return stats::StatisticSpec::indicator(m);
}

stats::ObservationWindow make_window(const StatisticSelector& sel, const WindowRule& rule, int n,
                                     int m, std::uint64_t z_seed) {
  stats::ObservationWindow w = rule.resolve(n, m, z_seed);
  switch (sel.kind) {
    case StatisticSelector::Kind::college_frequency:
      w.colleges = {sel.college};
      break;
    case StatisticSelector::Kind::matched_fraction:
    case StatisticSelector::Kind::x_below: {
      w.colleges.clear();
      for (int j = 1; j <= m; ++j) w.colleges.push_back(j);
      break;
    }
  }
  return w;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  double s = 0.0;
  for (double x : v) s += x;
  r.mean = s / v.size();
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (v.size() - 1) / v.size());
  }
  return r;
}

}  // namespace

stats::ObservationWindow WindowRule::resolve(int n, int m, std::uint64_t z_seed) const {
  if (kind == Kind::full) return stats::ObservationWindow::full(n, m);
  return stats::ObservationWindow::fraction(n, m, rho, z_seed);
}

void ExperimentConfig::validate() const {
  model.validate();
  std::string problems;
  auto add = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (replications < 2) add("replications must be >= 2");
  if (target_factor < 1) add("target factor must be >= 1");
  for (int n : n_grid)
    if (n < 1) add("n_grid entries must be >= 1");
  for (double s : sigma_grid)
    if (s < 0) add("sigma_grid entries must be >= 0");
  for (double t : t_grid)
    if (t < 0) add("t_grid entries must be >= 0");
  if (window.kind == WindowRule::Kind::fraction && (window.rho <= 0 || window.rho > 1))
    add("window rho must be in (0,1]");
  if (statistic.kind == StatisticSelector::Kind::college_frequency &&
      (statistic.college < 0 || statistic.college > model.m))
    add("statistic college out of range");
  if (!problems.empty()) throw std::invalid_argument(problems);
}

double a_nZ(int n_Z, int m, double sigma_n) {
  const double s = std::max(sigma_n, std::pow(n_Z, -5.0 / 6.0));
  return static_cast<double>(n_Z) * n_Z * s * s * std::log(static_cast<double>(n_Z) * m) + 1.0;
}

double b_nZ(int n_Z, double sigma_n) {
  const double s = std::max(sigma_n, std::pow(n_Z, -5.0 / 6.0));
  return std::pow(n_Z, 1.5) * s + 1.0;
}

double theorem_bound(const BoundInputs& in, double t) {
  if (t < 0) throw std::invalid_argument("theorem_bound: t must be >= 0");
  const double a = a_nZ(in.n_Z, in.m, in.sigma_n);
  const double b = b_nZ(in.n_Z, in.sigma_n);
  const double tt = std::min(t * t, std::pow(t, 1.5));
  const double denom = in.c_bar * in.c_bar + in.b_bar * in.b_bar * (a + b * t);
  return 4.0 * std::exp(-in.C * in.n_Z * tt / denom);
}

namespace {

struct ReplicationOutcome {
  double theta = 0.0;
  core::Matching matching;
};

// One replication with the frozen college side: draw students, build the
// profile, run deferred acceptance, evaluate the statistic.
ReplicationOutcome run_replication(const ExperimentConfig& config,
                                   const model::CollegeSide& side, int n, std::uint64_t rep) {
  model::ModelConfig mc = config.model;
  mc.n = n;
  Rng rng = model::student_stream(mc.seed, rep);
  const model::MarketRealization real = model::sample_students_given(mc, side, n, rng);
  const core::PreferenceProfile profile = model::derive_profile(real);
  core::Matching mu = algo::deferred_acceptance(profile, real.quotas);
  const auto spec = make_spec(config.statistic, mc.m);
  const auto window = make_window(config.statistic, config.window, n, mc.m, mc.seed);
  const double theta = stats::theta_hat(mu, real.X, real.Z, spec, window).value;
  return {theta, std::move(mu)};
}

}  // namespace

TargetEstimate estimate_target(const ExperimentConfig& config, const model::CollegeSide& side,
                               int n, int replications) {
  std::vector<double> values(replications);
  // Target replications use a salt offset so they are independent of the
  // deviation replications drawn from the same seed.
  parallel_for(0, replications, config.threads, [&](int r) {
    values[r] = run_replication(config, side, n, 0x7A6000000ULL + r).theta;
  });
  const MeanSe ms = mean_se(values);
  return {ms.mean, ms.se, replications};
}

ConcentrationReport concentration_profile(const ExperimentConfig& config) {
  config.validate();
  ConcentrationReport report;
  report.t_grid = config.t_grid;
  const std::vector<int> grid = config.n_grid.empty() ? std::vector<int>{config.model.n}
                                                      : config.n_grid;
  Rng crng = model::college_stream(config.model.seed);
  const model::CollegeSide side = model::sample_college_side(config.model, crng);

  for (int n : grid) {
    ConcentrationCell cell;
    cell.n = n;
    cell.n_Z = make_window(config.statistic, config.window, n, config.model.m, config.model.seed)
                   .n_Z();
    cell.sigma_n = config.model.sigma.resolve(n);
    cell.target = estimate_target(config, side, n, config.target_factor * config.replications);

    cell.records.resize(config.replications);
    parallel_for(0, config.replications, config.threads, [&](int r) {
      const double theta = run_replication(config, side, n, r).theta;
      cell.records[r] = {r, config.model.seed, theta, theta - cell.target.value};
    });

    double ss = 0.0;
    for (const auto& rec : cell.records) ss += rec.deviation * rec.deviation;
    cell.rms_deviation = std::sqrt(ss / config.replications);

    double t_min = 0.0;
    for (double t : config.t_grid)
      if (t > 0.0 && (t_min == 0.0 || t < t_min)) t_min = t;
    cell.target_se_warning = t_min > 0.0 && cell.target.se >= t_min / 10.0;

    const auto spec = make_spec(config.statistic, config.model.m);
    const auto window =
        make_window(config.statistic, config.window, n, config.model.m, config.model.seed);
    cell.b_bar = 0.0;
    cell.c_bar = 0.0;
    for (int j : window.colleges) {
      cell.b_bar += spec.b[j];
      cell.c_bar += spec.c[j];
    }

    cell.tail.assign(config.t_grid.size(), 0.0);
    for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti) {
      long count = 0;
      for (const auto& rec : cell.records)
        if (std::abs(rec.deviation) >= config.t_grid[ti]) ++count;
      cell.tail[ti] = static_cast<double>(count) / config.replications;
    }
    report.cells.push_back(std::move(cell));
  }

  // Fit C by least squares on log tails at the fit cell, then evaluate the
  // fitted bound everywhere.
  report.fit_n = config.fit_n > 0 ? config.fit_n : grid.front();
  const ConcentrationCell* fit_cell = nullptr;
  for (const auto& cell : report.cells)
    if (cell.n == report.fit_n) fit_cell = &cell;
  if (fit_cell == nullptr) throw std::invalid_argument("fit_n is not on the n grid");

  {
    const int nz = fit_cell->n_Z;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t ti = 0; ti < report.t_grid.size(); ++ti) {
      const double tail = fit_cell->tail[ti];
      if (tail <= 0.0) continue;
      const double t = report.t_grid[ti];
      const double a = a_nZ(nz, config.model.m, fit_cell->sigma_n);
      const double b = b_nZ(nz, fit_cell->sigma_n);
      const double g = nz * std::min(t * t, std::pow(t, 1.5)) /
                       (fit_cell->c_bar * fit_cell->c_bar +
                        fit_cell->b_bar * fit_cell->b_bar * (a + b * t));
      num += g * (std::log(4.0) - std::log(tail));
      den += g * g;
    }
    report.fitted_C = den > 0 ? num / den : 1.0;
  }

  report.bound.resize(report.cells.size());
  for (std::size_t ci = 0; ci < report.cells.size(); ++ci) {
    const auto& cell = report.cells[ci];
    BoundInputs in{cell.n_Z, config.model.m, static_cast<int>(config.model.m), cell.sigma_n,
                   cell.b_bar, cell.c_bar, report.fitted_C};
    report.bound[ci].resize(report.t_grid.size());
    for (std::size_t ti = 0; ti < report.t_grid.size(); ++ti) {
      report.bound[ci][ti] = theorem_bound(in, report.t_grid[ti]);
      if (cell.n > report.fit_n && cell.tail[ti] > report.bound[ci][ti]) ++report.bound_violations;
    }
  }
  return report;
}

AuditReport bounded_difference_audit(const ExperimentConfig& config) {
  config.validate();
  const std::vector<int> grid = config.n_grid.empty() ? std::vector<int>{config.model.n}
                                                      : config.n_grid;
  const std::vector<double> sigmas =
      config.sigma_grid.empty() ? std::vector<double>{0.0} : config.sigma_grid;

  AuditReport report;
  report.records.resize(static_cast<std::size_t>(config.replications));
  const int cells = static_cast<int>(grid.size() * sigmas.size());

  parallel_for(0, config.replications, config.threads, [&](int trial) {
    const int cell = trial % cells;
    const int n = grid[cell % grid.size()];
    const double sigma = sigmas[cell / grid.size()];

    model::ModelConfig mc = config.model;
    mc.n = n;
    mc.sigma.kind = model::SigmaRule::Kind::fixed;
    mc.sigma.value = sigma;

    Rng crng = model::college_stream(mc.seed + trial);
    const model::CollegeSide side = model::sample_college_side(mc, crng);
    Rng srng = model::student_stream(mc.seed, trial);
    model::MarketRealization real = model::sample_students_given(mc, side, n, srng);

    // Perturb: resample the full quality row of one uniformly chosen student.
    model::MarketRealization real2 = real;
    const int who = static_cast<int>(srng.below(static_cast<std::uint64_t>(n)));
    for (int k = 0; k < mc.x_dim; ++k) real2.X(who, k) = srng.uniform01();
    for (int j = 0; j < mc.m; ++j) {
      real2.eps(who, j) = mc.eps_scale * (mc.eps_dist == model::Dist::normal
                                              ? srng.normal()
                                              : srng.uniform(-1.0, 1.0));
      real2.eta(who, j) =
          mc.eta_dist == model::Dist::normal ? srng.normal() : srng.uniform(-1.0, 1.0);
    }
    real2.lambda[who] = real2.X(who, 0);
    for (int j = 0; j < mc.m; ++j)
      real2.omega(who, j) = real2.lambda[who] + real2.sigma_n * real2.eta(who, j);

    const core::PreferenceProfile u = model::derive_profile(real);
    const core::PreferenceProfile u2 = model::derive_profile(real2);

    const core::Matching sosm = algo::deferred_acceptance(u, real.quotas);
    const core::Matching sosm2 = algo::deferred_acceptance(u2, real2.quotas);

    const int h1 = model::max_rank_difference_fast(real).h;
    const int h2 = model::max_rank_difference_fast(real2).h;
    const int k = std::max(h1, h2);
    const int kv1 = std::max(k, 1);

    BdcTrialRecord rec;
    rec.trial = trial;
    rec.seed = mc.seed;
    rec.n = n;
    rec.sigma = sigma;
    rec.k = k;

    const auto sosm_pair = algo::perturbation_diff(sosm, sosm2, k);
    rec.sosm_max_change = sosm_pair.max_per_college();
    rec.sosm_total_changed = sosm_pair.total_changed_students;
    if (rec.sosm_max_change > 16 * kv1 + 1) ++rec.violations;
    if (rec.sosm_total_changed > 8 * config.model.m * kv1 + 3) ++rec.violations;

    if (config.audit_college_optimal) {
      const core::Matching copt = algo::deferred_acceptance_college_proposing(u, real.quotas);
      const core::Matching copt2 = algo::deferred_acceptance_college_proposing(u2, real2.quotas);
      // Same profile: SOSM vs college-optimal, each side with its own h.
      const int same1 = algo::perturbation_diff(sosm, copt, h1).max_per_college();
      const int same2 = algo::perturbation_diff(sosm2, copt2, h2).max_per_college();
      rec.sosm_vs_copt_max = std::max(same1, same2);
      if (same1 > 8 * std::max(h1, 1)) ++rec.violations;
      if (same2 > 8 * std::max(h2, 1)) ++rec.violations;

      // Any stable matching of u against any stable matching of u'.
      int cross = 0;
      cross = std::max(cross, algo::perturbation_diff(sosm, sosm2, k).max_per_college());
      cross = std::max(cross, algo::perturbation_diff(sosm, copt2, k).max_per_college());
      cross = std::max(cross, algo::perturbation_diff(copt, sosm2, k).max_per_college());
      cross = std::max(cross, algo::perturbation_diff(copt, copt2, k).max_per_college());
      rec.cross_max_change = cross;
      if (cross > 32 * kv1 + 1) ++rec.violations;
    } else {
      rec.cross_max_change = rec.sosm_max_change;
      if (rec.cross_max_change > 32 * kv1 + 1) ++rec.violations;
    }

    report.records[trial] = rec;
  });

  report.trials = config.replications;
  for (const auto& rec : report.records) report.violations += rec.violations;
  return report;
}

EquilibrationReport equilibration_audit(const ExperimentConfig& config) {
  config.validate();
  const std::vector<int> ns = config.n_grid.empty() ? std::vector<int>{config.model.n}
                                                    : config.n_grid;
  const std::vector<int> ms = config.m_grid.empty() ? std::vector<int>{config.model.m}
                                                    : config.m_grid;
  const std::vector<double> sigmas =
      config.sigma_grid.empty() ? std::vector<double>{0.0} : config.sigma_grid;

  EquilibrationReport report;
  report.records.resize(static_cast<std::size_t>(config.replications));
  const int cells = static_cast<int>(ns.size() * ms.size() * sigmas.size());

  parallel_for(0, config.replications, config.threads, [&](int trial) {
    int cell = trial % cells;
    const int n = ns[cell % ns.size()];
    cell /= static_cast<int>(ns.size());
    const int m = ms[cell % ms.size()];
    const double sigma = sigmas[cell / ms.size()];

    model::ModelConfig mc = config.model;
    mc.n = n;
    mc.m = m;
    mc.sigma.kind = model::SigmaRule::Kind::fixed;
    mc.sigma.value = sigma;

    Rng crng = model::college_stream(mc.seed + trial);
    const model::CollegeSide side = model::sample_college_side(mc, crng);
    Rng srng = model::student_stream(mc.seed, trial);
    const model::MarketRealization real = model::sample_students_given(mc, side, n, srng);
    const core::PreferenceProfile u = model::derive_profile(real);
    const int removed = static_cast<int>(srng.below(static_cast<std::uint64_t>(n)));

    const core::Matching full_sosm = algo::deferred_acceptance(u, real.quotas);
    const core::PreferenceProfile u_reduced = algo::remove_student(u, removed);
    const core::Matching reduced_sosm = algo::deferred_acceptance(u_reduced, real.quotas);
    const core::Matching embedded = algo::embed_without_student(reduced_sosm, removed);
    const auto [restabilized, trace] = algo::restabilize(embedded, u, real.quotas);

    EquilibrationTrialRecord rec;
    rec.trial = trial;
    rec.seed = mc.seed;
    rec.n = n;
    rec.m = m;
    rec.sigma = sigma;
    rec.removed_student = removed;
    rec.k = model::max_rank_difference_fast(real).h;
    const int kv1 = std::max(rec.k, 1);

    rec.equilibrated = restabilized == full_sosm;
    if (!rec.equilibrated) ++rec.violations;

    // N_{j,1} = roster under the full SOSM minus roster with the student
    // removed; N_{j,0} the reverse.
    for (core::CollegeId j = 1; j <= m; ++j) {
      int nj1 = 0;
      int nj0 = 0;
      for (int i = 0; i < n; ++i) {
        const bool in_full = full_sosm.of(i) == j;
        const bool in_embedded = embedded.of(i) == j;
        nj1 += in_full && !in_embedded;
        nj0 += !in_full && in_embedded;
      }
      rec.max_nj1 = std::max(rec.max_nj1, nj1);
      rec.max_nj0 = std::max(rec.max_nj0, nj0);
    }
    if (rec.max_nj1 > 4 * kv1) ++rec.violations;
    if (rec.max_nj0 > 4 * kv1) ++rec.violations;

    for (int i = 0; i < n; ++i)
      if (i != removed && full_sosm.of(i) != embedded.of(i)) ++rec.changed_students;
    if (rec.changed_students > 4 * m * kv1 + 1) ++rec.violations;

    // Fill counts between a stable matching and a 1-envy-free matching:
    // either all equal, or exactly one college fills one extra seat.
    int delta_colleges = 0;
    bool delta_ok = true;
    for (core::CollegeId j = 1; j <= m; ++j) {
      const int d = full_sosm.fill(j) - embedded.fill(j);
      if (d == 0) continue;
      ++delta_colleges;
      if (d != 1) delta_ok = false;
    }
    rec.fill_delta_colleges = delta_colleges;
    if (!delta_ok || delta_colleges > 1) ++rec.violations;

    report.records[trial] = rec;
  });

  report.trials = config.replications;
  for (const auto& rec : report.records) report.violations += rec.violations;
  return report;
}

RankDiffReportAggregate rank_difference_scaling(const ExperimentConfig& config) {
  config.validate();
  const std::vector<int> ns = config.n_grid.empty() ? std::vector<int>{config.model.n}
                                                    : config.n_grid;
  const std::vector<double> sigmas =
      config.sigma_grid.empty() ? std::vector<double>{config.model.sigma.value} : config.sigma_grid;

  RankDiffReportAggregate report;
  for (int n : ns) {
    for (double sigma : sigmas) {
      model::ModelConfig mc = config.model;
      mc.n = n;
      mc.sigma.kind = model::SigmaRule::Kind::fixed;
      mc.sigma.value = sigma;

      Rng crng = model::college_stream(mc.seed);
      const model::CollegeSide side = model::sample_college_side(mc, crng);

      std::vector<double> hs(config.replications);
      parallel_for(0, config.replications, config.threads, [&](int r) {
        Rng srng = model::student_stream(mc.seed, r);
        const model::MarketRealization real = model::sample_students_given(mc, side, n, srng);
        hs[r] = model::max_rank_difference_fast(real).h;
      });

      RankDiffCell cell;
      cell.n = n;
      cell.sigma = sigma;
      const MeanSe ms = mean_se(hs);
      cell.mean_h = ms.mean;
      cell.se_h = ms.se;
      const double c = kRankDiffConstant;
      cell.lower_bound = 4.0 * c * c * c * c * (n - 2) * sigma * sigma;
      cell.nontrivial = sigma > 0.0 && mc.m >= 2 && n >= 3;
      if (cell.nontrivial && cell.mean_h < cell.lower_bound - 3.0 * cell.se_h) {
        cell.violation = true;
        ++report.violations;
      }
      // Degenerate cases where no disagreement is possible at all.
      if ((sigma == 0.0 || mc.m == 1) && cell.mean_h != 0.0) {
        cell.violation = true;
        ++report.violations;
      }
      report.cells.push_back(cell);
    }
  }
  return report;
}

ConsistencyReport estimator_consistency_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::vector<int> grid = config.n_grid.empty() ? std::vector<int>{config.model.n}
                                                      : config.n_grid;
  const int n_max = *std::max_element(grid.begin(), grid.end());
  const int m = config.model.m;

  Rng crng = model::college_stream(config.model.seed);
  const model::CollegeSide side = model::sample_college_side(config.model, crng);

  // Probe grid for the CDF sup norm.
  std::vector<double> xgrid;
  for (int g = 0; g <= 100; ++g) xgrid.push_back(g / 100.0);

  const auto run_once = [&](int n, std::uint64_t rep) {
    model::ModelConfig mc = config.model;
    mc.n = n;
    Rng rng = model::student_stream(mc.seed, rep);
    const model::MarketRealization real = model::sample_students_given(mc, side, n, rng);
    const core::PreferenceProfile profile = model::derive_profile(real);
    core::Matching mu = algo::deferred_acceptance(profile, real.quotas);
    return std::pair<model::MarketRealization, core::Matching>(real, std::move(mu));
  };

  // Replication oracle at the largest grid n: averaged CDF curves and kernel
  // probabilities, plus the rank-association value from a 10x sample.
  const int oracle_reps = 4 * config.replications;
  std::vector<std::vector<double>> cdf_oracle(m, std::vector<double>(xgrid.size(), 0.0));
  std::vector<std::vector<double>> cdf_weight(m, std::vector<double>(xgrid.size(), 0.0));
  std::vector<std::vector<double>> ker_oracle(m, std::vector<double>(config.probe_points.size(), 0.0));
  std::vector<std::vector<double>> ker_weight(m, std::vector<double>(config.probe_points.size(), 0.0));
  const double h_max = std::pow(n_max, config.bandwidth_exponent);
  {
    std::vector<std::vector<std::vector<double>>> cdf_parts(
        oracle_reps, std::vector<std::vector<double>>(m, std::vector<double>(xgrid.size(), -1.0)));
    std::vector<std::vector<std::vector<double>>> ker_parts(
        oracle_reps,
        std::vector<std::vector<double>>(m, std::vector<double>(config.probe_points.size(), -1.0)));
    parallel_for(0, oracle_reps, config.threads, [&](int r) {
      const auto [real, mu] = run_once(n_max, 0x0AC1E00000ULL + r);
      const auto window = stats::ObservationWindow::full(n_max, m);
      for (int j = 1; j <= m; ++j) {
        for (std::size_t g = 0; g < xgrid.size(); ++g) {
          const double xv = xgrid[g];
          const auto v = stats::conditional_cdf(mu, real.X, window, j, {&xv, 1});
          if (v) cdf_parts[r][j - 1][g] = *v;
        }
        for (std::size_t p = 0; p < config.probe_points.size(); ++p) {
          const double xv = config.probe_points[p];
          const auto v = stats::kernel_conditional_prob(mu, real.X, window, j, {&xv, 1}, h_max,
                                                        stats::Kernel::epanechnikov);
          if (v) ker_parts[r][j - 1][p] = *v;
        }
      }
    });
    for (int r = 0; r < oracle_reps; ++r)
      for (int j = 0; j < m; ++j) {
        for (std::size_t g = 0; g < xgrid.size(); ++g)
          if (cdf_parts[r][j][g] >= 0.0) {
            cdf_oracle[j][g] += cdf_parts[r][j][g];
            cdf_weight[j][g] += 1.0;
          }
        for (std::size_t p = 0; p < config.probe_points.size(); ++p)
          if (ker_parts[r][j][p] >= 0.0) {
            ker_oracle[j][p] += ker_parts[r][j][p];
            ker_weight[j][p] += 1.0;
          }
      }
    for (int j = 0; j < m; ++j) {
      for (std::size_t g = 0; g < xgrid.size(); ++g)
        if (cdf_weight[j][g] > 0) cdf_oracle[j][g] /= cdf_weight[j][g];
      for (std::size_t p = 0; p < config.probe_points.size(); ++p)
        if (ker_weight[j][p] > 0) ker_oracle[j][p] /= ker_weight[j][p];
    }
  }

  ConsistencyReport report;
  // Rank-association oracle from a 10x sample, averaged over a few draws.
  {
    const int big = 10 * n_max;
    std::vector<double> rhos(3);
    parallel_for(0, 3, config.threads, [&](int r) {
      const auto [real, mu] = run_once(big, 0x0B16000000ULL + r);
      const auto window = stats::ObservationWindow::full(big, m);
      rhos[r] = stats::spearman_rho_hat(mu, real.X, real.Z, window, 0, 0);
    });
    report.rho_oracle = mean_se(rhos).mean;
  }

  // Colleges eligible for probing: estimated match probability above a small
  // floor at the largest n.
  std::vector<char> eligible(m + 1, 0);
  {
    const auto [real, mu] = run_once(n_max, 0x0E11610000ULL);
    const auto window = stats::ObservationWindow::full(n_max, m);
    for (int j = 1; j <= m; ++j)
      eligible[j] = stats::matching_frequency(mu, window, j) > 0.02;
  }

  for (int n : grid) {
    const double h = std::pow(n, config.bandwidth_exponent);
    std::vector<double> sup_errs(config.replications);
    std::vector<double> rho_errs(config.replications);
    std::vector<double> ker_errs(config.replications);
    std::vector<double> rhos(config.replications);
    parallel_for(0, config.replications, config.threads, [&](int r) {
      const auto [real, mu] = run_once(n, r);
      const auto window = stats::ObservationWindow::full(n, m);
      double sup = 0.0;
      double ker = 0.0;
      for (int j = 1; j <= m; ++j) {
        if (!eligible[j]) continue;
        for (std::size_t g = 0; g < xgrid.size(); ++g) {
          const double xv = xgrid[g];
          const auto v = stats::conditional_cdf(mu, real.X, window, j, {&xv, 1});
          if (v) sup = std::max(sup, std::abs(*v - cdf_oracle[j - 1][g]));
        }
        for (std::size_t p = 0; p < config.probe_points.size(); ++p) {
          const double xv = config.probe_points[p];
          const auto v = stats::kernel_conditional_prob(mu, real.X, window, j, {&xv, 1}, h,
                                                        stats::Kernel::epanechnikov);
          if (v && ker_weight[j - 1][p] > 0)
            ker = std::max(ker, std::abs(*v - ker_oracle[j - 1][p]));
        }
      }
      sup_errs[r] = sup;
      ker_errs[r] = ker;
      const double rho = stats::spearman_rho_hat(mu, real.X, real.Z, window, 0, 0);
      rhos[r] = rho;
      rho_errs[r] = std::abs(rho - report.rho_oracle);
    });

    ConsistencyCell cell;
    cell.n = n;
    cell.median_sup_cdf_err = median(sup_errs);
    cell.median_rho_err = median(rho_errs);
    cell.median_kernel_err = median(ker_errs);
    report.cells.push_back(cell);
    if (n == n_max) report.rho_at_largest = median(rhos);
  }

  auto decreasing = [](const std::vector<ConsistencyCell>& cells, auto member) {
    for (std::size_t i = 1; i < cells.size(); ++i)
      if (cells[i].*member >= cells[i - 1].*member) return false;
    return true;
  };
  report.monotone_cdf = decreasing(report.cells, &ConsistencyCell::median_sup_cdf_err);
  report.monotone_rho = decreasing(report.cells, &ConsistencyCell::median_rho_err);
  report.monotone_kernel = decreasing(report.cells, &ConsistencyCell::median_kernel_err);
  return report;
}

SimulateReport simulate(const ExperimentConfig& config) {
  config.validate();
  Rng crng = model::college_stream(config.model.seed);
  const model::CollegeSide side = model::sample_college_side(config.model, crng);
  const int n = config.model.n;
  const int m = config.model.m;

  SimulateReport report;
  report.target =
      estimate_target(config, side, n, config.target_factor * config.replications);
  report.records.resize(config.replications);
  report.mean_frequency.assign(m + 1, 0.0);

  std::vector<std::vector<double>> freqs(config.replications);
  parallel_for(0, config.replications, config.threads, [&](int r) {
    const auto outcome = run_replication(config, side, n, r);
    report.records[r] = {r, config.model.seed, outcome.theta,
                         outcome.theta - report.target.value};
    auto& f = freqs[r];
    f.assign(m + 1, 0.0);
    const auto window = stats::ObservationWindow::full(n, m);
    for (int j = 0; j <= m; ++j) f[j] = stats::matching_frequency(outcome.matching, window, j);
  });
  for (const auto& f : freqs)
    for (int j = 0; j <= m; ++j) report.mean_frequency[j] += f[j] / config.replications;
  return report;
}

}  // namespace matchsim::expt
