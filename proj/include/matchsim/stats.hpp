#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "matchsim/market.hpp"
#include "matchsim/matrix.hpp"

namespace matchsim::stats {

// Which matching outcomes enter a statistic. Selection may depend on college
// characteristics and a college-side seed only, never on student qualities.
struct ObservationWindow {
  std::vector<int> students;   // N_Z, 0-based indices
  std::vector<int> colleges;   // M_Z, subset of {0..m}, nonempty

  int n_Z() const { return static_cast<int>(students.size()); }
  int m_Z() const { return static_cast<int>(colleges.size()); }

  static ObservationWindow full(int n, int m);
  // First ceil(rho*n) students after a shuffle seeded from the college side.
  static ObservationWindow fraction(int n, int m, double rho, std::uint64_t z_seed);
};

// The tau family with its declared bounds: |tau_j| <= b_j and oscillation
// |tau_j(x) - tau_j(x')| <= c_j.
struct StatisticSpec {
  std::function<double(int j, std::span<const double> x, const Matrix& Z)> tau;
  std::vector<double> b;  // indexed by college id 0..m
  std::vector<double> c;

  // tau_j = 1 for every j: theta is the windowed matching frequency mass.
  static StatisticSpec indicator(int m);
  // tau_j(x) = 1{x in A}.
  static StatisticSpec x_in_set(int m, std::function<bool(std::span<const double>)> A);
  // tau_j(x, Z) = 1{x in A, Z_j in A'} for j >= 1, 0 on the outside option.
  static StatisticSpec characteristic(int m, std::function<bool(std::span<const double>)> A,
                                      std::function<bool(std::span<const double>)> A2);
};

struct ThetaResult {
  double value = 0.0;
  double b_bar = 0.0;
  double c_bar = 0.0;
};

ThetaResult theta_hat(const core::Matching& matching, const Matrix& X, const Matrix& Z,
                      const StatisticSpec& spec, const ObservationWindow& window);

// (1/n_Z) sum_{i in N_Z} 1{Y_i = j}; j may be 0.
double matching_frequency(const core::Matching& matching, const ObservationWindow& window, int j);

// (1/n_Z) sum_i sum_{j in M_Z, j != 0} 1{X_i in A, Z_j in A', Y_i = j}.
double characteristic_matching_frequency(const core::Matching& matching, const Matrix& X,
                                         const Matrix& Z, const ObservationWindow& window,
                                         const std::function<bool(std::span<const double>)>& A,
                                         const std::function<bool(std::span<const double>)>& A2);

// Empirical CDF of X among window students matched to j, evaluated at x
// (componentwise <=). Empty college -> nullopt.
std::optional<double> conditional_cdf(const core::Matching& matching, const Matrix& X,
                                      const ObservationWindow& window, int j,
                                      std::span<const double> x);

// Rank-association estimator between X_{i,k} and Z_{Y_i,r} over matched
// window students, built from leave-out empirical CDFs. Throws when fewer
// than 3 matched students.
double spearman_rho_hat(const core::Matching& matching, const Matrix& X, const Matrix& Z,
                        const ObservationWindow& window, int k, int r);

namespace detail {
// Literal double sum over (i, l); quadratic cost. x and z are the matched
// window samples.
double spearman_double_sum(std::span<const double> x, std::span<const double> z);
// Counting form of the same sum via <=/>= counts; O(n log n).
double spearman_counting(std::span<const double> x, std::span<const double> z);
}  // namespace detail

enum class Kernel { epanechnikov, triangular };

double kernel_value(Kernel k, std::span<const double> u);  // product over coordinates

// Local constant estimator of P{Y=j | X=x}; nullopt when no kernel mass.
std::optional<double> kernel_conditional_prob(const core::Matching& matching, const Matrix& X,
                                              const ObservationWindow& window, int j,
                                              std::span<const double> x, double bandwidth,
                                              Kernel kernel);

}  // namespace matchsim::stats
