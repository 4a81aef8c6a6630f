#pragma once

#include <numeric>
#include <vector>

#include "matchsim/market.hpp"
#include "matchsim/rng.hpp"

namespace testutil {

using matchsim::Rng;
using matchsim::core::PreferenceProfile;
using matchsim::core::Quotas;

// The five-student, three-college market used in the worked examples.
// Students i1..i5 map to indices 0..4, colleges j1..j3 to ids 1..3.
inline PreferenceProfile example_market() {
  return PreferenceProfile(
      {{1, 2, 3, 0}, {2, 3, 1, 0}, {2, 3, 1, 0}, {3, 1, 2, 0}, {3, 2, 1, 0}},
      {{1, 4, 2, 3, 5, 0}, {1, 5, 2, 3, 4, 0}, {2, 3, 4, 5, 1, 0}});
}

// Same market with student i1 reporting (j2, j3, j1) instead.
inline PreferenceProfile example_market_perturbed() {
  return PreferenceProfile(
      {{2, 3, 1, 0}, {2, 3, 1, 0}, {2, 3, 1, 0}, {3, 1, 2, 0}, {3, 2, 1, 0}},
      {{1, 4, 2, 3, 5, 0}, {1, 5, 2, 3, 4, 0}, {2, 3, 4, 5, 1, 0}});
}

inline std::vector<int> random_permutation(int size, Rng& rng) {
  std::vector<int> p(size);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

// Uniformly random strict profile. With all_acceptable the outside option is
// pinned last on both sides; otherwise its position is random, which
// exercises unacceptability.
inline PreferenceProfile random_profile(int n, int m, Rng& rng, bool all_acceptable = false) {
  std::vector<std::vector<int>> students(n);
  for (int i = 0; i < n; ++i) {
    if (all_acceptable) {
      std::vector<int> cs(m);
      std::iota(cs.begin(), cs.end(), 1);
      rng.shuffle(cs);
      cs.push_back(0);
      students[i] = std::move(cs);
    } else {
      students[i] = random_permutation(m + 1, rng);
    }
  }
  std::vector<std::vector<int>> colleges(m);
  for (int j = 0; j < m; ++j) {
    if (all_acceptable) {
      std::vector<int> ss(n);
      std::iota(ss.begin(), ss.end(), 1);
      rng.shuffle(ss);
      ss.push_back(0);
      colleges[j] = std::move(ss);
    } else {
      colleges[j] = random_permutation(n + 1, rng);
    }
  }
  return PreferenceProfile(std::move(students), std::move(colleges));
}

inline Quotas random_quotas(int m, int max_q, Rng& rng) {
  Quotas q;
  q.values.resize(m);
  for (int j = 0; j < m; ++j) q.values[j] = 1 + static_cast<int>(rng.below(max_q));
  return q;
}

}  // namespace testutil
