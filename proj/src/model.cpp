#include "matchsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace matchsim::model {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double draw(Dist d, Rng& rng) {
  switch (d) {
    case Dist::normal: return rng.normal();
    case Dist::uniform_pm1: return rng.uniform(-1.0, 1.0);
  }
  return 0.0;
}

}  // namespace

double lambda_value(LambdaSpec spec, std::span<const double> x_row,
                    std::span<const double> eps_row) {
  (void)eps_row;
  switch (spec) {
    case LambdaSpec::x_first:
      return x_row[0];
    case LambdaSpec::x_mean: {
      double s = 0.0;
      for (double v : x_row) s += v;
      return s / static_cast<double>(x_row.size());
    }
  }
  return x_row[0];
}

core::Quotas QuotaRule::resolve(int n, int m) const {
  core::Quotas q;
  switch (kind) {
    case Kind::uniform:
      q.values.assign(m, per_college);
      break;
    case Kind::proportional: {
      const int per = std::max(1, static_cast<int>(std::ceil(fill * n / m)));
      q.values.assign(m, per);
      break;
    }
    case Kind::explicit_values:
      q.values = values;
      break;
  }
  if (static_cast<int>(q.values.size()) != m || !q.valid())
    throw std::invalid_argument("quota rule does not produce m positive quotas");
  return q;
}

double SigmaRule::resolve(int n) const {
  if (kind == Kind::fixed) return value;
  if (n < 2) return kappa;
  return kappa * std::pow(n, -a) * std::pow(std::log(n), -b);
}

void ModelConfig::validate() const {
  std::string problems;
  auto add = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (n < 1) add("n must be >= 1");
  if (m < 1) add("m must be >= 1");
  if (x_dim < 1) add("x_dim must be >= 1");
  if (z_dim < 1) add("z_dim must be >= 1");
  if (sigma.kind == SigmaRule::Kind::fixed && sigma.value < 0) add("sigma must be >= 0");
  if (sigma.kind == SigmaRule::Kind::schedule && sigma.kappa < 0) add("sigma kappa must be >= 0");
  if (eps_scale < 0) add("eps_scale must be >= 0");
  if (threshold.kind == ThresholdSpec::Kind::quantile && (threshold.p < 0 || threshold.p > 1))
    add("threshold quantile p must be in [0,1]");
  if (quotas.kind == QuotaRule::Kind::explicit_values) {
    if (static_cast<int>(quotas.values.size()) != m) add("explicit quotas must have m entries");
    for (int q : quotas.values)
      if (q < 1) add("quotas must be positive");
  }
  if (quotas.kind == QuotaRule::Kind::proportional && quotas.fill <= 0)
    add("quota fill must be positive");
  if (quotas.kind == QuotaRule::Kind::uniform && quotas.per_college < 1)
    add("per-college quota must be >= 1");
  if (!problems.empty()) throw std::invalid_argument(problems);
}

double MarketRealization::utility(int i, core::CollegeId j) const {
  if (j == 0) return outside_noise ? outside_eps[i] : outside_value;
  double systematic = 0.0;
  if (g == GSpec::dot) {
    const int d = std::min(X.cols, Z.cols);
    for (int k = 0; k < d; ++k) systematic += X(i, k) * Z(j - 1, k);
  }
  return systematic + eps(i, j - 1);
}

Rng college_stream(std::uint64_t seed) { return Rng::derive(seed, 0xC011E6E5ULL); }

Rng student_stream(std::uint64_t seed, std::uint64_t replication) {
  return Rng::derive(seed, 0x57D0000ULL + replication);
}

CollegeSide sample_college_side(const ModelConfig& config, Rng& rng) {
  CollegeSide side;
  side.Z = Matrix(config.m, config.z_dim);
  for (int j = 0; j < config.m; ++j)
    for (int k = 0; k < config.z_dim; ++k) side.Z(j, k) = rng.uniform01();
  side.xi.resize(config.m);
  for (int j = 0; j < config.m; ++j) side.xi[j] = rng.normal();
  side.c.assign(config.m, -kInf);
  if (config.threshold.kind == ThresholdSpec::Kind::quantile) {
    // Z-measurable constant cutoff. For the x_first catalog the vertical
    // index is Uniform[0,1], so this is exactly the p-quantile.
    side.c.assign(config.m, config.threshold.p);
  }
  return side;
}

MarketRealization sample_students_given(const ModelConfig& config, const CollegeSide& side, int n,
                                        Rng& rng) {
  const int m = config.m;
  MarketRealization real;
  real.Z = side.Z;
  real.xi = side.xi;
  real.c = side.c;
  real.quotas = config.quotas.resolve(n, m);
  real.sigma_n = config.sigma.resolve(n);
  real.outside_value = config.outside.value;
  real.outside_noise = config.outside.kind == OutsideSpec::Kind::noise;
  real.g = config.g;

  real.X = Matrix(n, config.x_dim);
  real.eps = Matrix(n, m);
  real.eta = Matrix(n, m);
  real.omega = Matrix(n, m);
  real.lambda.resize(n);
  real.outside_eps.assign(n, 0.0);

  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < config.x_dim; ++k) real.X(i, k) = rng.uniform01();
    for (int j = 0; j < m; ++j) real.eps(i, j) = config.eps_scale * draw(config.eps_dist, rng);
    for (int j = 0; j < m; ++j) real.eta(i, j) = draw(config.eta_dist, rng);
    if (real.outside_noise) real.outside_eps[i] = config.eps_scale * draw(config.eps_dist, rng);
    real.lambda[i] = lambda_value(config.lambda, real.X.row(i), real.eps.row(i));
    for (int j = 0; j < m; ++j) real.omega(i, j) = real.lambda[i] + real.sigma_n * real.eta(i, j);
  }
  return real;
}

MarketRealization sample_market(const ModelConfig& config) {
  config.validate();
  Rng crng = college_stream(config.seed);
  const CollegeSide side = sample_college_side(config, crng);
  Rng srng = student_stream(config.seed, 0);
  return sample_students_given(config, side, config.n, srng);
}

std::vector<std::vector<int>> derive_college_preferences(const MarketRealization& real,
                                                         DeriveDiagnostics* diag) {
  const int n = real.students();
  const int m = real.colleges();
  std::vector<std::vector<int>> orders(m);
  std::vector<int> idx(n);
  for (int j = 0; j < m; ++j) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const double wa = real.omega(a, j);
      const double wb = real.omega(b, j);
      if (wa != wb) return wa > wb;
      return a < b;  // tie toward the lower student index
    });
    if (diag) {
      for (int s = 0; s + 1 < n; ++s)
        if (real.omega(idx[s], j) == real.omega(idx[s + 1], j)) ++diag->college_ties;
    }
    auto& order = orders[j];
    order.reserve(n + 1);
    bool cutoff_placed = false;
    for (int s : idx) {
      // Unacceptable iff c_j > omega_ij; a student exactly at the cutoff
      // stays acceptable.
      if (!cutoff_placed && real.c[j] > real.omega(s, j)) {
        order.push_back(0);
        cutoff_placed = true;
        if (diag && real.c[j] == real.omega(s, j)) ++diag->college_ties;
      }
      order.push_back(s + 1);
    }
    if (!cutoff_placed) order.push_back(0);
  }
  return orders;
}

std::vector<std::vector<int>> derive_student_preferences(const MarketRealization& real,
                                                         DeriveDiagnostics* diag) {
  const int n = real.students();
  const int m = real.colleges();
  std::vector<std::vector<int>> orders(n);
  for (int i = 0; i < n; ++i) {
    auto& order = orders[i];
    order.resize(m + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double ua = real.utility(i, a);
      const double ub = real.utility(i, b);
      if (ua != ub) return ua > ub;
      return a < b;  // tie toward the lower id; 0 beats any college
    });
    if (diag) {
      for (int s = 0; s < m; ++s)
        if (real.utility(i, order[s]) == real.utility(i, order[s + 1])) ++diag->student_ties;
    }
  }
  return orders;
}

core::PreferenceProfile derive_profile(const MarketRealization& real, DeriveDiagnostics* diag) {
  return core::PreferenceProfile(derive_student_preferences(real, diag),
                                 derive_college_preferences(real, diag));
}

ReportProfile truthful_report(const MarketRealization& real) {
  ReportProfile report;
  report.student_reports = derive_student_preferences(real);
  report.college_priorities = Matrix(real.colleges(), real.students());
  for (int j = 0; j < real.colleges(); ++j)
    for (int i = 0; i < real.students(); ++i) report.college_priorities(j, i) = real.omega(i, j);
  report.college_thresholds = real.c;
  return report;
}

core::PreferenceProfile decode_report(const ReportProfile& report) {
  const int m = report.college_priorities.rows;
  const int n = report.college_priorities.cols;
  std::vector<std::vector<int>> college_orders(m);
  std::vector<int> idx(n);
  for (int j = 0; j < m; ++j) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const double wa = report.college_priorities(j, a);
      const double wb = report.college_priorities(j, b);
      if (wa != wb) return wa > wb;
      return a < b;
    });
    auto& order = college_orders[j];
    order.reserve(n + 1);
    bool cutoff_placed = false;
    for (int s : idx) {
      if (!cutoff_placed && report.college_thresholds[j] > report.college_priorities(j, s)) {
        order.push_back(0);
        cutoff_placed = true;
      }
      order.push_back(s + 1);
    }
    if (!cutoff_placed) order.push_back(0);
  }
  return core::PreferenceProfile(report.student_reports, std::move(college_orders));
}

core::RankDiffReport max_rank_difference_fast(const MarketRealization& real) {
  const int n = real.students();
  const int m = real.colleges();
  core::RankDiffReport report;
  if (m <= 1) return report;

  // Rank tables with the cutoff entry inserted, as in the derived profile.
  const auto orders = derive_college_preferences(real);
  std::vector<std::vector<int>> rank(m, std::vector<int>(n + 1));
  for (int j = 0; j < m; ++j)
    for (int pos = 0; pos <= n; ++pos) rank[j][orders[j][pos]] = pos;

  auto consider = [&](int e1, int e2, bool disputed) {
    if (!disputed) return;
    int gap = 0;
    int gap_college = 1;
    for (int j = 0; j < m; ++j) {
      const int d = std::abs(rank[j][e1] - rank[j][e2]);
      if (d > gap) {
        gap = d;
        gap_college = j + 1;
      }
    }
    if (gap > report.h) {
      report.h = gap;
      report.witness = core::RankDiffWitness{e1, e2, gap_college};
    }
  };

  // Student pairs: a dispute needs |lambda_a - lambda_b| <= 2*sigma*max|eta|,
  // so only pairs within that window of the lambda ordering are candidates.
  double max_eta = 0.0;
  for (double e : real.eta.data) max_eta = std::max(max_eta, std::abs(e));
  const double window = 2.0 * real.sigma_n * max_eta;

  std::vector<int> by_lambda(n);
  std::iota(by_lambda.begin(), by_lambda.end(), 0);
  std::sort(by_lambda.begin(), by_lambda.end(), [&](int a, int b) {
    if (real.lambda[a] != real.lambda[b]) return real.lambda[a] < real.lambda[b];
    return a < b;
  });

  // prefers(a over b) at college j, matching the derived tie-break.
  auto above = [&](int a, int b, int j) {
    const double wa = real.omega(a, j);
    const double wb = real.omega(b, j);
    if (wa != wb) return wa > wb;
    return a < b;
  };

  for (int hi = 0; hi < n; ++hi) {
    const int a = by_lambda[hi];
    for (int lo = hi - 1; lo >= 0; --lo) {
      const int b = by_lambda[lo];
      if (real.lambda[a] - real.lambda[b] > window) break;
      bool saw_ab = false;
      bool saw_ba = false;
      for (int j = 0; j < m && !(saw_ab && saw_ba); ++j) (above(a, b, j) ? saw_ab : saw_ba) = true;
      consider(a + 1, b + 1, saw_ab && saw_ba);
    }
  }

  // Cutoff pairs: student vs entry 0 is disputed iff acceptability differs
  // across colleges.
  for (int s = 0; s < n; ++s) {
    bool acc = false;
    bool unacc = false;
    for (int j = 0; j < m && !(acc && unacc); ++j)
      (real.c[j] > real.omega(s, j) ? unacc : acc) = true;
    consider(s + 1, 0, acc && unacc);
  }
  return report;
}

}  // namespace matchsim::model
