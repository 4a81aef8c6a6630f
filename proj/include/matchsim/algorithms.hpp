#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "matchsim/market.hpp"

namespace matchsim::algo {

using core::BlockingPair;
using core::CollegeId;
using core::Matching;
using core::PreferenceProfile;
using core::Quotas;

// Student-proposing deferred acceptance; returns the student-optimal stable
// matching. Output does not depend on proposal order.
Matching deferred_acceptance(const PreferenceProfile& profile, const Quotas& quotas);

// College-proposing deferred acceptance; returns the college-optimal stable
// matching.
Matching deferred_acceptance_college_proposing(const PreferenceProfile& profile,
                                               const Quotas& quotas);

// Profile over the n-1 remaining students. Reduced indices are compact:
// a reduced student r corresponds to full student r when r < removed, and to
// r+1 otherwise.
PreferenceProfile remove_student(const PreferenceProfile& profile, int removed);

Quotas remove_student_quotas(const Quotas& quotas);  // identity, for symmetry

// Expand a matching on the reduced market back to the full student set with
// `removed` unmatched.
Matching embed_without_student(const Matching& mu_reduced, int removed);

struct RestabStep {
  BlockingPair satisfied;
  std::optional<int> displaced;
};

struct RestabTrace {
  std::vector<RestabStep> steps;
  int iterations() const { return static_cast<int>(steps.size()); }
};

struct RestabStepResult {
  Matching next;
  std::optional<RestabStep> step;  // empty when the input was already stable
};

// One application of the re-stabilization operator: satisfy the unique
// student-maximal blocking pair of a 1-envy-free matching. Throws
// std::invalid_argument when the input is not 1-envy-free.
RestabStepResult restabilize_step(const Matching& mu, const PreferenceProfile& profile,
                                  const Quotas& quotas);

// Iterate to the stable fixed point. Throws std::runtime_error if the
// iteration cap n*m*max(q)+1 is exceeded or the terminal matching is not
// stable (neither can occur for a 1-envy-free input).
std::pair<Matching, RestabTrace> restabilize(const Matching& mu, const PreferenceProfile& profile,
                                             const Quotas& quotas);

// One-to-one market obtained by splitting college j into q_j positions
// sharing its preference list; students prefer lower position indices within
// a college. Positions are colleges 1..P of the related profile.
struct RelatedMarket {
  PreferenceProfile profile;
  Quotas quotas;                                    // all ones
  std::vector<std::pair<CollegeId, int>> position;  // position id (1-based) -> (college, slot)
  std::vector<int> first_position;                  // college j -> first position id

  int positions() const { return static_cast<int>(position.size()) - 1; }
  // Many-to-one matching -> related matching (rosters fill positions in
  // college preference order); exact inverse of from_related.
  Matching to_related(const Matching& mu) const;
  Matching from_related(const Matching& mu_bar) const;
};

RelatedMarket to_related_one_to_one(const PreferenceProfile& profile, const Quotas& quotas);

struct PerturbationDiff {
  // Index j in 0..m: |{i : 1{mu(i)=j} != 1{mu'(i)=j}}|; j = 0 counts the
  // unmatched indicator changes.
  std::vector<int> per_college_indicator_change;
  int total_changed_students = 0;
  int k = 0;

  int max_per_college() const {
    int best = 0;
    for (int v : per_college_indicator_change) best = v > best ? v : best;
    return best;
  }
};

PerturbationDiff perturbation_diff(const Matching& mu, const Matching& mu_prime, int k);

}  // namespace matchsim::algo
