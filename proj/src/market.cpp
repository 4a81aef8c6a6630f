#include "matchsim/market.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace matchsim::core {

Matching::Matching(std::vector<CollegeId> assignment, int colleges)
    : assignment_(std::move(assignment)) {
  rosters_.assign(static_cast<std::size_t>(colleges) + 1, {});
  for (int i = 0; i < static_cast<int>(assignment_.size()); ++i) {
    CollegeId j = assignment_[i];
    if (j < 0 || j > colleges) throw std::invalid_argument("matching entry out of range");
    rosters_[j].push_back(i);
  }
}

namespace {

void check_permutation(const std::vector<int>& order, int ground_size, const char* what) {
  if (static_cast<int>(order.size()) != ground_size)
    throw std::invalid_argument(std::string(what) + ": wrong length");
  std::vector<char> seen(ground_size, 0);
  for (int v : order) {
    if (v < 0 || v >= ground_size || seen[v])
      throw std::invalid_argument(std::string(what) + ": not a permutation");
    seen[v] = 1;
  }
}

}  // namespace

PreferenceProfile::PreferenceProfile(std::vector<std::vector<int>> student_order,
                                     std::vector<std::vector<int>> college_order)
    : n_(static_cast<int>(student_order.size())),
      m_(static_cast<int>(college_order.size())),
      student_order_(std::move(student_order)),
      college_order_(std::move(college_order)) {
  student_rank_.assign(static_cast<std::size_t>(n_) * (m_ + 1), -1);
  college_rank_.assign(static_cast<std::size_t>(m_) * (n_ + 1), -1);
  for (int i = 0; i < n_; ++i) {
    check_permutation(student_order_[i], m_ + 1, "student order");
    for (int pos = 0; pos <= m_; ++pos)
      student_rank_[static_cast<std::size_t>(i) * (m_ + 1) + student_order_[i][pos]] = pos;
  }
  for (int j = 0; j < m_; ++j) {
    check_permutation(college_order_[j], n_ + 1, "college order");
    for (int pos = 0; pos <= n_; ++pos)
      college_rank_[static_cast<std::size_t>(j) * (n_ + 1) + college_order_[j][pos]] = pos;
  }
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::one_envy_free: return "one_envy_free";
    case StabilityClass::envy_free: return "envy_free";
    case StabilityClass::individually_rational: return "individually_rational";
    case StabilityClass::unstable: return "unstable";
  }
  return "?";
}

Validity validate_matching(const Matching& matching, const Quotas& quotas) {
  Validity v;
  if (matching.colleges() != quotas.colleges()) {
    v.ok = false;
    v.message = "college count mismatch";
    return v;
  }
  for (CollegeId j = 1; j <= quotas.colleges(); ++j) {
    if (matching.fill(j) > quotas.of(j)) {
      v.ok = false;
      v.over_quota_college = j;
      v.message = "college " + std::to_string(j) + " over quota";
      return v;
    }
  }
  return v;
}

std::vector<BlockingPair> blocking_pairs(const Matching& matching,
                                         const PreferenceProfile& profile,
                                         const Quotas& quotas) {
  std::vector<BlockingPair> out;
  const int n = profile.students();
  const int m = profile.colleges();
  // Worst roster member per college, precomputed once.
  std::vector<int> worst(m + 1, -1);
  for (CollegeId j = 1; j <= m; ++j) {
    for (int s : matching.roster(j))
      if (worst[j] < 0 || profile.college_prefers(j, worst[j], s)) worst[j] = s;
  }
  for (int i = 0; i < n; ++i) {
    const int current = profile.student_rank(i, matching.of(i));
    for (CollegeId j = 1; j <= m; ++j) {
      if (profile.student_rank(i, j) >= current) continue;  // j not preferred to mu(i)
      const bool full = matching.fill(j) >= quotas.of(j);
      bool blocks;
      if (!full) {
        blocks = profile.acceptable_to_college(j, i);
      } else {
        blocks = worst[j] >= 0 && profile.college_prefers(j, i, worst[j]);
      }
      if (blocks) out.push_back({i, j});
    }
  }
  return out;
}

bool is_individually_rational(const Matching& matching, const PreferenceProfile& profile) {
  for (int i = 0; i < profile.students(); ++i) {
    CollegeId j = matching.of(i);
    if (j == kUnmatched) continue;
    if (!profile.acceptable_to_student(i, j)) return false;
    if (!profile.acceptable_to_college(j, i)) return false;
  }
  return true;
}

bool is_stable(const Matching& matching, const PreferenceProfile& profile, const Quotas& quotas) {
  return is_individually_rational(matching, profile) &&
         blocking_pairs(matching, profile, quotas).empty();
}

StabilityClass classify_matching(const Matching& matching, const PreferenceProfile& profile,
                                 const Quotas& quotas) {
  if (!is_individually_rational(matching, profile)) return StabilityClass::unstable;
  const auto pairs = blocking_pairs(matching, profile, quotas);
  if (pairs.empty()) return StabilityClass::stable;
  bool all_unmatched = true;
  bool common_student = true;
  for (const auto& p : pairs) {
    if (matching.of(p.student) != kUnmatched) all_unmatched = false;
    if (p.student != pairs.front().student) common_student = false;
  }
  if (all_unmatched && common_student) return StabilityClass::one_envy_free;
  if (all_unmatched) return StabilityClass::envy_free;
  return StabilityClass::individually_rational;
}

std::vector<Matching> enumerate_stable_matchings(const PreferenceProfile& profile,
                                                 const Quotas& quotas,
                                                 const EnumerationLimits& limits) {
  const int n = profile.students();
  const int m = profile.colleges();
  if (n > limits.max_students || m > limits.max_colleges)
    throw std::invalid_argument("market too large for exhaustive enumeration");

  std::vector<Matching> stable;
  std::vector<CollegeId> assign(n, 0);
  std::vector<int> fill(m + 1, 0);

  // Depth-first over assignment vectors in lexicographic order, pruning on
  // capacity as we go.
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n) {
      Matching mu(assign, m);
      if (is_stable(mu, profile, quotas)) stable.push_back(std::move(mu));
      return;
    }
    for (CollegeId j = 0; j <= m; ++j) {
      if (j != 0 && fill[j] >= quotas.of(j)) continue;
      assign[i] = j;
      if (j != 0) ++fill[j];
      self(self, i + 1);
      if (j != 0) --fill[j];
    }
    assign[i] = 0;
  };
  rec(rec, 0);
  return stable;
}

RankDiffReport max_rank_difference(const PreferenceProfile& profile) {
  const int n = profile.students();
  const int m = profile.colleges();
  RankDiffReport report;
  if (m <= 1) return report;

  // Entry e: 0 = cutoff, s+1 = student s; rank of entry e at college j.
  auto rank_of = [&](CollegeId j, int e) {
    return e == 0 ? profile.college_cutoff_rank(j) : profile.college_rank(j, e - 1);
  };

  for (int e1 = 0; e1 <= n; ++e1) {
    for (int e2 = e1 + 1; e2 <= n; ++e2) {
      bool saw_above = false;
      bool saw_below = false;
      int gap = 0;
      CollegeId gap_college = 0;
      for (CollegeId j = 1; j <= m; ++j) {
        const int d = rank_of(j, e1) - rank_of(j, e2);
        (d < 0 ? saw_above : saw_below) = true;
        const int a = d < 0 ? -d : d;
        if (a > gap) {
          gap = a;
          gap_college = j;
        }
      }
      if (saw_above && saw_below && gap > report.h) {
        report.h = gap;
        report.witness = RankDiffWitness{e1, e2, gap_college};
      }
    }
  }
  return report;
}

}  // namespace matchsim::core
