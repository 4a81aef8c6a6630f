#include "matchsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "matchsim/rng.hpp"

namespace matchsim::stats {

ObservationWindow ObservationWindow::full(int n, int m) {
  ObservationWindow w;
  w.students.resize(n);
  std::iota(w.students.begin(), w.students.end(), 0);
  w.colleges.resize(m + 1);
  std::iota(w.colleges.begin(), w.colleges.end(), 0);
  return w;
}

ObservationWindow ObservationWindow::fraction(int n, int m, double rho, std::uint64_t z_seed) {
  if (rho <= 0.0 || rho > 1.0) throw std::invalid_argument("window fraction must be in (0,1]");
  ObservationWindow w;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng::derive(z_seed, 0x3A9D0FULL);
  rng.shuffle(idx);
  const int take = static_cast<int>(std::ceil(rho * n));
  idx.resize(std::max(1, take));
  std::sort(idx.begin(), idx.end());
  w.students = std::move(idx);
  w.colleges.resize(m + 1);
  std::iota(w.colleges.begin(), w.colleges.end(), 0);
  return w;
}

StatisticSpec StatisticSpec::indicator(int m) {
  StatisticSpec s;
  s.tau = [](int, std::span<const double>, const Matrix&) { return 1.0; };
  s.b.assign(m + 1, 1.0);
  s.c.assign(m + 1, 0.0);
  return s;
}

StatisticSpec StatisticSpec::x_in_set(int m, std::function<bool(std::span<const double>)> A) {
  StatisticSpec s;
  s.tau = [A = std::move(A)](int, std::span<const double> x, const Matrix&) {
    return A(x) ? 1.0 : 0.0;
  };
  s.b.assign(m + 1, 1.0);
  s.c.assign(m + 1, 1.0);
  return s;
}

StatisticSpec StatisticSpec::characteristic(int m, std::function<bool(std::span<const double>)> A,
                                            std::function<bool(std::span<const double>)> A2) {
  StatisticSpec s;
  s.tau = [A = std::move(A), A2 = std::move(A2)](int j, std::span<const double> x,
                                                 const Matrix& Z) {
    if (j == 0) return 0.0;
    return A(x) && A2(Z.row(j - 1)) ? 1.0 : 0.0;
  };
  s.b.assign(m + 1, 1.0);
  s.c.assign(m + 1, 1.0);
  return s;
}

ThetaResult theta_hat(const core::Matching& matching, const Matrix& X, const Matrix& Z,
                      const StatisticSpec& spec, const ObservationWindow& window) {
  if (window.colleges.empty()) throw std::invalid_argument("theta_hat: empty college window");
  if (window.students.empty()) throw std::invalid_argument("theta_hat: empty student window");

  std::vector<char> in_window(matching.colleges() + 1, 0);
  ThetaResult r;
  for (int j : window.colleges) {
    in_window[j] = 1;
    r.b_bar += spec.b[j];
    r.c_bar += spec.c[j];
  }
  double sum = 0.0;
  for (int i : window.students) {
    const int j = matching.of(i);
    if (in_window[j]) sum += spec.tau(j, X.row(i), Z);
  }
  r.value = sum / window.n_Z();
  return r;
}

double matching_frequency(const core::Matching& matching, const ObservationWindow& window, int j) {
  long count = 0;
  for (int i : window.students) count += matching.of(i) == j;
  return static_cast<double>(count) / window.n_Z();
}

double characteristic_matching_frequency(const core::Matching& matching, const Matrix& X,
                                         const Matrix& Z, const ObservationWindow& window,
                                         const std::function<bool(std::span<const double>)>& A,
                                         const std::function<bool(std::span<const double>)>& A2) {
  std::vector<char> in_window(matching.colleges() + 1, 0);
  for (int j : window.colleges) in_window[j] = 1;
  long count = 0;
  for (int i : window.students) {
    const int j = matching.of(i);
    if (j == 0 || !in_window[j]) continue;
    if (A(X.row(i)) && A2(Z.row(j - 1))) ++count;
  }
  return static_cast<double>(count) / window.n_Z();
}

std::optional<double> conditional_cdf(const core::Matching& matching, const Matrix& X,
                                      const ObservationWindow& window, int j,
                                      std::span<const double> x) {
  long le = 0;
  long at = 0;
  for (int i : window.students) {
    if (matching.of(i) != j) continue;
    ++at;
    bool below = true;
    for (int k = 0; k < X.cols && below; ++k) below = X(i, k) <= x[k];
    le += below;
  }
  if (at == 0) return std::nullopt;
  return static_cast<double>(le) / static_cast<double>(at);
}

namespace detail {

namespace {

using Wide = __int128;

struct SpearmanInputs {
  int n = 0;
  std::vector<int> z_level;        // per observation, compressed z level
  std::vector<double> z_sorted;    // distinct z values ascending
  std::vector<long> cle_x, cge_x;  // #{x_i' <= x_i}, #{x_i' >= x_i}
  std::vector<long> cle_z, cge_z;
  // joint[lev][i] = #{i': x_{i'} <= x_i, z_{i'} <= z_sorted[lev]}
  std::vector<std::vector<long>> joint;
};

SpearmanInputs prepare(std::span<const double> x, std::span<const double> z, bool with_joint) {
  SpearmanInputs in;
  const int n = static_cast<int>(x.size());
  in.n = n;

  in.z_sorted.assign(z.begin(), z.end());
  std::sort(in.z_sorted.begin(), in.z_sorted.end());
  in.z_sorted.erase(std::unique(in.z_sorted.begin(), in.z_sorted.end()), in.z_sorted.end());
  const int levels = static_cast<int>(in.z_sorted.size());
  in.z_level.resize(n);
  for (int i = 0; i < n; ++i)
    in.z_level[i] = static_cast<int>(
        std::lower_bound(in.z_sorted.begin(), in.z_sorted.end(), z[i]) - in.z_sorted.begin());

  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  in.cle_x.resize(n);
  in.cge_x.resize(n);
  for (int i = 0; i < n; ++i) {
    in.cle_x[i] = std::upper_bound(xs.begin(), xs.end(), x[i]) - xs.begin();
    in.cge_x[i] = n - (std::lower_bound(xs.begin(), xs.end(), x[i]) - xs.begin());
  }
  std::vector<long> level_count(levels, 0);
  for (int i = 0; i < n; ++i) ++level_count[in.z_level[i]];
  std::vector<long> level_cum(levels + 1, 0);
  for (int l = 0; l < levels; ++l) level_cum[l + 1] = level_cum[l] + level_count[l];
  in.cle_z.resize(n);
  in.cge_z.resize(n);
  for (int i = 0; i < n; ++i) {
    in.cle_z[i] = level_cum[in.z_level[i] + 1];
    in.cge_z[i] = n - level_cum[in.z_level[i]];
  }

  if (!with_joint) return in;

  // Joint dominance counts, one pass over x order per z level.
  std::vector<int> by_x(n);
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(), [&](int a, int b) { return x[a] < x[b]; });
  in.joint.assign(levels, std::vector<long>(n, 0));
  std::vector<long> running(levels, 0);
  int pos = 0;
  while (pos < n) {
    // advance over ties in x together so that <= counts are exact
    int end = pos;
    while (end < n && x[by_x[end]] == x[by_x[pos]]) ++end;
    for (int t = pos; t < end; ++t)
      for (int l = in.z_level[by_x[t]]; l < levels; ++l) ++running[l];
    for (int t = pos; t < end; ++t)
      for (int l = 0; l < levels; ++l) in.joint[l][by_x[t]] = running[l];
    pos = end;
  }
  return in;
}

double finish(Wide scaled_sum, int n) {
  const Wide denom = static_cast<Wide>(n) * n * (n - 2) * (static_cast<Wide>(n - 1) * (n - 1));
  const long double value = 12.0L * static_cast<long double>(scaled_sum) /
                            static_cast<long double>(denom);
  return static_cast<double>(value);
}

}  // namespace

double spearman_double_sum(std::span<const double> x, std::span<const double> z) {
  const SpearmanInputs in = prepare(x, z, true);
  const int n = in.n;
  const Wide sq = static_cast<Wide>(n - 1) * (n - 1);

  // Every cell is carried over the common denominator (n-2)(n-1)^2 so the
  // accumulation is exact integer arithmetic.
  Wide sum = 0;
  for (int i = 0; i < n; ++i) {
    const long a = in.cle_x[i] - 1;
    for (int l = 0; l < n; ++l) {
      const int lev = in.z_level[l];
      long numer = in.joint[lev][i];
      numer -= in.z_level[i] <= lev ? 1 : 0;            // drop i' = i
      if (l != i) numer -= x[l] <= x[i] ? 1 : 0;        // drop i' = l
      const long b = in.cle_z[l] - 1;
      sum += static_cast<Wide>(numer) * sq - static_cast<Wide>(a) * b * (n - 2);
    }
  }
  return finish(sum, n);
}

double spearman_counting(std::span<const double> x, std::span<const double> z) {
  const SpearmanInputs in = prepare(x, z, false);
  const int n = in.n;

  Wide t1 = 0;
  for (int i = 0; i < n; ++i)
    t1 += static_cast<Wide>(in.cge_x[i] - 1) * (in.cge_z[i] - 1);
  Wide sum_a = 0;
  Wide sum_b = 0;
  for (int i = 0; i < n; ++i) {
    sum_a += in.cle_x[i] - 1;
    sum_b += in.cle_z[i] - 1;
  }
  const Wide sq = static_cast<Wide>(n - 1) * (n - 1);
  const Wide sum = t1 * sq - sum_a * sum_b * (n - 2);
  return finish(sum, n);
}

}  // namespace detail

double spearman_rho_hat(const core::Matching& matching, const Matrix& X, const Matrix& Z,
                        const ObservationWindow& window, int k, int r) {
  std::vector<double> x;
  std::vector<double> z;
  for (int i : window.students) {
    const int j = matching.of(i);
    if (j == 0) continue;
    x.push_back(X(i, k));
    z.push_back(Z(j - 1, r));
  }
  const int n1 = static_cast<int>(x.size());
  if (n1 < 3) throw std::invalid_argument("spearman_rho_hat needs at least 3 matched students");
  // Identical results by exact arithmetic; the counting path avoids the
  // quadratic cell loop for large samples.
  if (n1 <= 20000) return detail::spearman_double_sum(x, z);
  return detail::spearman_counting(x, z);
}

double kernel_value(Kernel k, std::span<const double> u) {
  double v = 1.0;
  for (double ui : u) {
    const double a = std::abs(ui);
    if (a > 1.0) return 0.0;
    switch (k) {
      case Kernel::epanechnikov: v *= 0.75 * (1.0 - ui * ui); break;
      case Kernel::triangular: v *= 1.0 - a; break;
    }
  }
  return v;
}

std::optional<double> kernel_conditional_prob(const core::Matching& matching, const Matrix& X,
                                              const ObservationWindow& window, int j,
                                              std::span<const double> x, double bandwidth,
                                              Kernel kernel) {
  if (bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be positive");
  const int d = X.cols;
  std::vector<double> u(d);
  double num = 0.0;
  double den = 0.0;
  for (int i : window.students) {
    for (int k = 0; k < d; ++k) u[k] = (X(i, k) - x[k]) / bandwidth;
    const double w = kernel_value(kernel, u);
    den += w;
    if (matching.of(i) == j) num += w;
  }
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

}  // namespace matchsim::stats
