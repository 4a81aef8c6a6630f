#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matchsim/market.hpp"
#include "matchsim/model.hpp"
#include "matchsim/stats.hpp"

namespace matchsim::expt {

// Constant documented in docs/rankdiff_bound_constant.md for the default
// catalog (Uniform[0,1] vertical index, standard normal horizontal noise).
inline constexpr double kRankDiffConstant = 1.5e-4;

struct StatisticSelector {
  enum class Kind { college_frequency, matched_fraction, x_below } kind =
      Kind::college_frequency;
  int college = 1;
  double x_cut = 0.5;  // x_below: tau_j = 1{x_0 <= x_cut}
};

struct WindowRule {
  enum class Kind { full, fraction } kind = Kind::full;
  double rho = 1.0;

  stats::ObservationWindow resolve(int n, int m, std::uint64_t z_seed) const;
};

struct ExperimentConfig {
  model::ModelConfig model;
  std::string kind;  // experiment name; may be overridden by the dispatcher
  int replications = 200;
  int target_factor = 20;  // target uses target_factor * replications draws
  std::vector<int> n_grid;
  std::vector<double> sigma_grid;
  std::vector<int> m_grid;
  std::vector<double> t_grid;
  StatisticSelector statistic;
  WindowRule window;
  bool audit_college_optimal = true;
  std::vector<double> probe_points{0.25, 0.5, 0.75};
  double bandwidth_exponent = -0.2;  // h = n_Z^exponent
  int fit_n = 0;                     // concentration: fit C at this n (default smallest)
  int threads = 0;                   // 0 = hardware concurrency

  void validate() const;
};

struct TargetEstimate {
  double value = 0.0;
  double se = 0.0;
  int replications = 0;
};

// Finite-population target: mean of theta_hat over fresh student draws with
// the college side frozen.
TargetEstimate estimate_target(const ExperimentConfig& config, const model::CollegeSide& side,
                               int n, int replications);

struct ReplicationRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  double deviation = 0.0;
};

struct ConcentrationCell {
  int n = 0;    // market size
  int n_Z = 0;  // observation window size used in the bound
  TargetEstimate target;
  std::vector<ReplicationRecord> records;
  double rms_deviation = 0.0;
  std::vector<double> tail;   // empirical P{|dev| >= t} per t in t_grid
  double b_bar = 1.0, c_bar = 0.0;
  double sigma_n = 0.0;
  bool target_se_warning = false;  // target SE >= smallest positive t / 10
};

struct ConcentrationReport {
  std::vector<double> t_grid;
  std::vector<ConcentrationCell> cells;  // one per n in n_grid
  double fitted_C = 0.0;                 // least squares on log tails at fit_n
  int fit_n = 0;
  // bound[cell][t] evaluated with fitted_C
  std::vector<std::vector<double>> bound;
  int bound_violations = 0;  // tail > bound at cells with n > fit_n
};

ConcentrationReport concentration_profile(const ExperimentConfig& config);

// a_{n,Z} and b_{n,Z} are recomputed from (n_Z, m, sigma_n) on every call.
struct BoundInputs {
  int n_Z = 0;
  int m = 1;
  int m_Z = 1;
  double sigma_n = 0.0;
  double b_bar = 1.0;
  double c_bar = 0.0;
  double C = 1.0;
};

double a_nZ(int n_Z, int m, double sigma_n);
double b_nZ(int n_Z, double sigma_n);
double theorem_bound(const BoundInputs& inputs, double t);

struct BdcTrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  int n = 0;
  double sigma = 0.0;
  int k = 0;  // max of the two realized rank differences
  int sosm_max_change = 0;        // max over j in {0..m} of indicator changes, SOSM pair
  int sosm_total_changed = 0;
  int sosm_vs_copt_max = 0;       // same profile, SOSM vs college-optimal
  int cross_max_change = 0;       // worst pair of stable matchings across the perturbation
  int violations = 0;
};

struct AuditReport {
  std::vector<BdcTrialRecord> records;
  long trials = 0;
  long violations = 0;
};

// Resample one student's full quality row and compare stable matchings of
// the two realizations against the displacement bounds.
AuditReport bounded_difference_audit(const ExperimentConfig& config);

struct EquilibrationTrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  double sigma = 0.0;
  int removed_student = 0;
  int k = 0;
  bool equilibrated = false;      // restabilize(embed(DA(u_-i))) == DA(u)
  int max_nj1 = 0;                // max over colleges of |N_{j,1}|
  int max_nj0 = 0;
  int changed_students = 0;       // students other than i with different match
  int fill_delta_colleges = 0;    // colleges whose fill count differs
  int violations = 0;
};

struct EquilibrationReport {
  std::vector<EquilibrationTrialRecord> records;
  long trials = 0;
  long violations = 0;
};

EquilibrationReport equilibration_audit(const ExperimentConfig& config);

struct RankDiffCell {
  int n = 0;
  double sigma = 0.0;
  double mean_h = 0.0;
  double se_h = 0.0;
  double lower_bound = 0.0;  // 4 c^4 (n-2) sigma^2
  bool nontrivial = false;
  bool violation = false;
};

struct RankDiffReportAggregate {
  std::vector<RankDiffCell> cells;
  long violations = 0;
};

RankDiffReportAggregate rank_difference_scaling(const ExperimentConfig& config);

struct ConsistencyCell {
  int n = 0;
  double median_sup_cdf_err = 0.0;
  double median_rho_err = 0.0;
  double median_kernel_err = 0.0;
};

struct ConsistencyReport {
  std::vector<ConsistencyCell> cells;
  double rho_oracle = 0.0;       // rank association at the 10x sample
  double rho_at_largest = 0.0;   // median estimate at the largest grid n
  bool monotone_cdf = false;
  bool monotone_rho = false;
  bool monotone_kernel = false;
};

ConsistencyReport estimator_consistency_sweep(const ExperimentConfig& config);

struct SimulateReport {
  TargetEstimate target;
  std::vector<ReplicationRecord> records;
  std::vector<double> mean_frequency;  // per college id 0..m
};

// Replication study of the configured statistic at the configured n.
SimulateReport simulate(const ExperimentConfig& config);

}  // namespace matchsim::expt
