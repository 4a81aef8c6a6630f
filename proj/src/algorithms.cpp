#include "matchsim/algorithms.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <stdexcept>

namespace matchsim::algo {

Matching deferred_acceptance(const PreferenceProfile& profile, const Quotas& quotas) {
  const int n = profile.students();
  const int m = profile.colleges();

  std::vector<CollegeId> assign(n, core::kUnmatched);
  std::vector<int> next_pos(n, 0);
  // Per college: max-heap on college rank, worst held student on top.
  std::vector<std::priority_queue<std::pair<int, int>>> held(m + 1);

  std::deque<int> free;
  for (int i = 0; i < n; ++i) free.push_back(i);

  while (!free.empty()) {
    const int i = free.front();
    free.pop_front();
    while (next_pos[i] <= m) {
      const CollegeId j = profile.student_list(i)[next_pos[i]];
      if (j == 0) {
        next_pos[i] = m + 1;  // prefers staying unmatched to anything left
        break;
      }
      ++next_pos[i];
      if (!profile.acceptable_to_college(j, i)) continue;
      const int rank = profile.college_rank(j, i);
      if (static_cast<int>(held[j].size()) < quotas.of(j)) {
        held[j].emplace(rank, i);
        assign[i] = j;
        break;
      }
      const auto [worst_rank, worst] = held[j].top();
      if (rank < worst_rank) {
        held[j].pop();
        held[j].emplace(rank, i);
        assign[i] = j;
        assign[worst] = core::kUnmatched;
        free.push_back(worst);
        break;
      }
      // rejected outright; try the next college on i's list
    }
  }
  return Matching(std::move(assign), m);
}

Matching deferred_acceptance_college_proposing(const PreferenceProfile& profile,
                                               const Quotas& quotas) {
  const int n = profile.students();
  const int m = profile.colleges();

  std::vector<CollegeId> hold(n, core::kUnmatched);
  std::vector<int> next_pos(m + 1, 0);
  std::vector<int> holds_count(m + 1, 0);

  std::deque<CollegeId> active;
  for (CollegeId j = 1; j <= m; ++j) active.push_back(j);

  while (!active.empty()) {
    const CollegeId j = active.front();
    active.pop_front();
    const auto& list = profile.college_list(j);
    while (holds_count[j] < quotas.of(j) && next_pos[j] <= n) {
      const int entry = list[next_pos[j]];
      if (entry == 0) {
        next_pos[j] = n + 1;  // everything below the cutoff is unacceptable
        break;
      }
      ++next_pos[j];
      const int s = entry - 1;
      if (!profile.acceptable_to_student(s, j)) continue;
      if (hold[s] == core::kUnmatched) {
        hold[s] = j;
        ++holds_count[j];
      } else if (profile.student_prefers(s, j, hold[s])) {
        const CollegeId old = hold[s];
        hold[s] = j;
        ++holds_count[j];
        --holds_count[old];
        active.push_back(old);
      }
    }
  }
  return Matching(std::move(hold), m);
}

PreferenceProfile remove_student(const PreferenceProfile& profile, int removed) {
  const int n = profile.students();
  const int m = profile.colleges();
  if (removed < 0 || removed >= n) throw std::invalid_argument("remove_student: bad index");

  std::vector<std::vector<int>> student_order;
  student_order.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i == removed) continue;
    student_order.push_back(profile.student_list(i));
  }
  std::vector<std::vector<int>> college_order(m);
  for (CollegeId j = 1; j <= m; ++j) {
    auto& out = college_order[j - 1];
    out.reserve(n);
    for (int entry : profile.college_list(j)) {
      if (entry == removed + 1) continue;
      out.push_back(entry > removed + 1 ? entry - 1 : entry);
    }
  }
  return PreferenceProfile(std::move(student_order), std::move(college_order));
}

Quotas remove_student_quotas(const Quotas& quotas) { return quotas; }

Matching embed_without_student(const Matching& mu_reduced, int removed) {
  const int n = mu_reduced.students() + 1;
  std::vector<CollegeId> assign(n, core::kUnmatched);
  for (int r = 0; r < mu_reduced.students(); ++r) {
    const int full = r < removed ? r : r + 1;
    assign[full] = mu_reduced.of(r);
  }
  return Matching(std::move(assign), mu_reduced.colleges());
}

namespace {

// The sole student that 1-envy-freeness allows to block, or -1 for stable.
// Throws when blocking pairs involve distinct students or a matched student.
int unique_blocker(const Matching& mu, const PreferenceProfile& profile, const Quotas& quotas) {
  if (!core::is_individually_rational(mu, profile))
    throw std::invalid_argument("input matching is not 1-envy-free");
  const auto pairs = core::blocking_pairs(mu, profile, quotas);
  if (pairs.empty()) return -1;
  const int b = pairs.front().student;
  for (const auto& p : pairs)
    if (p.student != b) throw std::invalid_argument("input matching is not 1-envy-free");
  if (mu.of(b) != core::kUnmatched)
    throw std::invalid_argument("input matching is not 1-envy-free");
  return b;
}

// Best college the (unmatched) student b can block with, or 0 if none.
CollegeId best_blocking_college(int b, const std::vector<CollegeId>& assign,
                                const std::vector<int>& fill, const std::vector<int>& worst,
                                const PreferenceProfile& profile, const Quotas& quotas) {
  const int limit = profile.student_rank(b, assign[b]);
  for (int pos = 0; pos < limit; ++pos) {
    const CollegeId j = profile.student_list(b)[pos];
    if (j == 0) break;
    if (fill[j] < quotas.of(j)) {
      if (profile.acceptable_to_college(j, b)) return j;
    } else if (worst[j] >= 0 && profile.college_prefers(j, b, worst[j])) {
      return j;
    }
  }
  return 0;
}

struct RosterState {
  std::vector<CollegeId> assign;
  std::vector<int> fill;
  std::vector<int> worst;  // worst roster member per college (-1 when empty)

  explicit RosterState(const Matching& mu, const PreferenceProfile& profile)
      : assign(mu.assignment()), fill(mu.colleges() + 1, 0), worst(mu.colleges() + 1, -1) {
    for (CollegeId j = 1; j <= mu.colleges(); ++j) {
      fill[j] = mu.fill(j);
      for (int s : mu.roster(j))
        if (worst[j] < 0 || profile.college_prefers(j, worst[j], s)) worst[j] = s;
    }
  }

  void recompute_worst(CollegeId j, const PreferenceProfile& profile) {
    worst[j] = -1;
    for (int s = 0; s < static_cast<int>(assign.size()); ++s)
      if (assign[s] == j && (worst[j] < 0 || profile.college_prefers(j, worst[j], s))) worst[j] = s;
  }

  // Satisfy (b, j); returns the displaced student if the roster was full.
  std::optional<int> admit(int b, CollegeId j, const PreferenceProfile& profile,
                           const Quotas& quotas) {
    std::optional<int> displaced;
    if (fill[j] >= quotas.of(j)) {
      displaced = worst[j];
      assign[*displaced] = core::kUnmatched;
      --fill[j];
    }
    assign[b] = j;
    ++fill[j];
    recompute_worst(j, profile);
    return displaced;
  }
};

}  // namespace

RestabStepResult restabilize_step(const Matching& mu, const PreferenceProfile& profile,
                                  const Quotas& quotas) {
  const int b = unique_blocker(mu, profile, quotas);
  if (b < 0) return {mu, std::nullopt};

  RosterState state(mu, profile);
  const CollegeId j = best_blocking_college(b, state.assign, state.fill, state.worst, profile, quotas);
  const auto displaced = state.admit(b, j, profile, quotas);
  RestabStep step{BlockingPair{b, j}, displaced};
  return {Matching(std::move(state.assign), mu.colleges()), step};
}

std::pair<Matching, RestabTrace> restabilize(const Matching& mu, const PreferenceProfile& profile,
                                             const Quotas& quotas) {
  RestabTrace trace;
  int blocker = unique_blocker(mu, profile, quotas);
  if (blocker < 0) return {mu, trace};

  int max_q = 0;
  for (int q : quotas.values) max_q = std::max(max_q, q);
  const long cap = static_cast<long>(profile.students()) * profile.colleges() * max_q + 1;

  RosterState state(mu, profile);
  long iterations = 0;
  // After each satisfied pair the displaced student (if any) is the only
  // candidate blocker left, so the fixed point is reached along a single
  // displacement chain.
  while (blocker >= 0) {
    if (++iterations > cap) throw std::runtime_error("re-stabilization exceeded iteration cap");
    const CollegeId j =
        best_blocking_college(blocker, state.assign, state.fill, state.worst, profile, quotas);
    if (j == 0) break;  // current candidate cannot block: stable
    const auto displaced = state.admit(blocker, j, profile, quotas);
    trace.steps.push_back({BlockingPair{blocker, j}, displaced});
    blocker = displaced.value_or(-1);
  }

  Matching result(std::move(state.assign), mu.colleges());
  if (!core::is_stable(result, profile, quotas))
    throw std::runtime_error("re-stabilization terminated on an unstable matching");
  return {std::move(result), std::move(trace)};
}

RelatedMarket to_related_one_to_one(const PreferenceProfile& profile, const Quotas& quotas) {
  const int n = profile.students();
  const int m = profile.colleges();

  RelatedMarket rm;
  rm.position.push_back({0, 0});  // slot for id 0
  rm.first_position.assign(m + 1, 0);
  for (CollegeId j = 1; j <= m; ++j) {
    rm.first_position[j] = static_cast<int>(rm.position.size());
    for (int s = 0; s < quotas.of(j); ++s) rm.position.push_back({j, s});
  }
  const int P = rm.positions();

  std::vector<std::vector<int>> student_order(n);
  for (int i = 0; i < n; ++i) {
    auto& order = student_order[i];
    order.reserve(P + 1);
    for (CollegeId j : profile.student_list(i)) {
      if (j == 0) {
        order.push_back(0);
        continue;
      }
      for (int s = 0; s < quotas.of(j); ++s) order.push_back(rm.first_position[j] + s);
    }
  }
  std::vector<std::vector<int>> college_order(P);
  for (int p = 1; p <= P; ++p) college_order[p - 1] = profile.college_list(rm.position[p].first);

  rm.profile = PreferenceProfile(std::move(student_order), std::move(college_order));
  rm.quotas = Quotas{std::vector<int>(P, 1)};
  return rm;
}

Matching RelatedMarket::to_related(const Matching& mu) const {
  const int n = mu.students();
  std::vector<CollegeId> assign(n, 0);
  for (CollegeId j = 1; j <= static_cast<int>(first_position.size()) - 1; ++j) {
    std::vector<int> roster = mu.roster(j);
    // Positions are filled in the order students occur in w_j.
    std::sort(roster.begin(), roster.end(), [&](int a, int b) {
      return profile.college_rank(first_position[j], a) < profile.college_rank(first_position[j], b);
    });
    for (std::size_t s = 0; s < roster.size(); ++s)
      assign[roster[s]] = first_position[j] + static_cast<int>(s);
  }
  return Matching(std::move(assign), positions());
}

Matching RelatedMarket::from_related(const Matching& mu_bar) const {
  const int n = mu_bar.students();
  std::vector<CollegeId> assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const CollegeId p = mu_bar.of(i);
    assign[i] = p == 0 ? 0 : position[p].first;
  }
  return Matching(std::move(assign), static_cast<int>(first_position.size()) - 1);
}

PerturbationDiff perturbation_diff(const Matching& mu, const Matching& mu_prime, int k) {
  if (mu.students() != mu_prime.students() || mu.colleges() != mu_prime.colleges())
    throw std::invalid_argument("perturbation_diff: shape mismatch");
  PerturbationDiff d;
  d.k = k;
  d.per_college_indicator_change.assign(mu.colleges() + 1, 0);
  for (int i = 0; i < mu.students(); ++i) {
    const CollegeId a = mu.of(i);
    const CollegeId b = mu_prime.of(i);
    if (a == b) continue;
    ++d.total_changed_students;
    ++d.per_college_indicator_change[a];
    ++d.per_college_indicator_change[b];
  }
  return d;
}

}  // namespace matchsim::algo
