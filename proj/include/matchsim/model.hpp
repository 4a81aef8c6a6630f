#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "matchsim/market.hpp"
#include "matchsim/matrix.hpp"
#include "matchsim/rng.hpp"

namespace matchsim::model {

// Quota rules are functions of (n, m) so the same config can be swept over
// market sizes.
struct QuotaRule {
  enum class Kind { uniform, proportional, explicit_values } kind = Kind::proportional;
  int per_college = 1;          // uniform
  double fill = 0.75;           // proportional: q_j = ceil(fill * n / m)
  std::vector<int> values;      // explicit

  core::Quotas resolve(int n, int m) const;
};

struct SigmaRule {
  enum class Kind { fixed, schedule } kind = Kind::schedule;
  double value = 0.0;                          // fixed
  double kappa = 1.0, a = 0.75, b = 0.5;       // schedule: kappa * n^-a * (ln n)^-b

  double resolve(int n) const;
};

enum class Dist { normal, uniform_pm1 };

struct OutsideSpec {
  enum class Kind { constant, noise } kind = Kind::constant;
  double value = 0.0;  // may be -inf to force everyone to report all colleges
};

struct ThresholdSpec {
  enum class Kind { none, quantile } kind = Kind::none;
  double p = 0.0;  // college cutoff at the p-quantile of the vertical index
};

// Vertical-index catalog. Both maps are bounded with bounded density under
// X_i ~ Uniform[0,1]^x_dim; for x_first the interval mass obeys
// P{c-t <= lambda <= c+t} <= 2t (anti-concentration constant 2). The map
// receives the full student row, so variants depending on the taste shocks
// can be added without touching the sampler.
enum class LambdaSpec { x_first, x_mean };

double lambda_value(LambdaSpec spec, std::span<const double> x_row,
                    std::span<const double> eps_row);

// Systematic part of student utility for a college.
enum class GSpec { dot, zero };

struct ModelConfig {
  int n = 100;
  int m = 2;
  QuotaRule quotas;
  SigmaRule sigma;
  LambdaSpec lambda = LambdaSpec::x_first;
  GSpec g = GSpec::dot;
  double eps_scale = 1.0;
  Dist eta_dist = Dist::normal;
  Dist eps_dist = Dist::normal;
  OutsideSpec outside;
  ThresholdSpec threshold;
  int x_dim = 1;
  int z_dim = 1;
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument listing all problems
};

// College-side draw (Z, xi) plus thresholds; frozen across replications when
// estimating finite-population targets.
struct CollegeSide {
  Matrix Z;                 // m x z_dim
  std::vector<double> xi;   // m
  std::vector<double> c;    // m thresholds
};

struct MarketRealization {
  Matrix X;                     // n x x_dim
  Matrix eps;                   // n x m
  Matrix eta;                   // n x m
  Matrix omega;                 // n x m, omega_ij = lambda_i + sigma_n * eta_ij
  std::vector<double> lambda;   // n
  std::vector<double> outside_eps;  // n; used only by OutsideSpec::noise
  Matrix Z;                     // m x z_dim
  std::vector<double> xi;       // m
  std::vector<double> c;        // m
  core::Quotas quotas;
  double sigma_n = 0.0;
  double outside_value = 0.0;
  bool outside_noise = false;
  GSpec g = GSpec::dot;

  int students() const { return X.rows; }
  int colleges() const { return Z.rows; }
  double utility(int i, core::CollegeId j) const;  // j in 0..m
};

CollegeSide sample_college_side(const ModelConfig& config, Rng& rng);

// n i.i.d. student rows conditional on the college side; omega and quotas
// filled per the config.
MarketRealization sample_students_given(const ModelConfig& config, const CollegeSide& side, int n,
                                        Rng& rng);

// Full draw from config.seed: college side first, then students.
MarketRealization sample_market(const ModelConfig& config);

// Same-seed replication streams: replication r of a config uses
// student stream derive(seed, r) with the college side frozen separately.
Rng college_stream(std::uint64_t seed);
Rng student_stream(std::uint64_t seed, std::uint64_t replication);

struct DeriveDiagnostics {
  long college_ties = 0;  // exact priority ties, resolved toward lower index
  long student_ties = 0;  // exact utility ties, resolved toward lower id
};

// College j ranks students by descending omega_ij; the cutoff entry 0 sits
// where c_j falls. Exact float ties go to the lower student index (and a
// student exactly at the cutoff counts as acceptable), counted in diag.
std::vector<std::vector<int>> derive_college_preferences(const MarketRealization& real,
                                                         DeriveDiagnostics* diag = nullptr);

// Student i ranks {0..m} by descending utility; ties go to the lower id.
std::vector<std::vector<int>> derive_student_preferences(const MarketRealization& real,
                                                         DeriveDiagnostics* diag = nullptr);

core::PreferenceProfile derive_profile(const MarketRealization& real,
                                       DeriveDiagnostics* diag = nullptr);

// What agents submit to the mechanism under truthful play: rank-order lists
// for students, (priority vector, threshold) per college.
struct ReportProfile {
  std::vector<std::vector<int>> student_reports;  // rank-order lists over {0..m}
  Matrix college_priorities;                      // m x n, row j-1 = omega_.j
  std::vector<double> college_thresholds;         // m
};

ReportProfile truthful_report(const MarketRealization& real);

core::PreferenceProfile decode_report(const ReportProfile& report);

// Exact maximum rank difference using the additive priority structure:
// disputed student pairs must have vertical indices within 2*sigma*max|eta|
// of each other, so only pairs inside that window are examined. Agrees with
// core::max_rank_difference on the derived profile.
core::RankDiffReport max_rank_difference_fast(const MarketRealization& real);

}  // namespace matchsim::model
