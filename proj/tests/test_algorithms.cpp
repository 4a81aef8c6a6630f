#include <doctest.h>

#include <algorithm>

#include "matchsim/algorithms.hpp"
#include "test_util.hpp"

using namespace matchsim;
using namespace matchsim::core;
using namespace matchsim::algo;
using testutil::example_market;
using testutil::example_market_perturbed;

TEST_CASE("DA reproduces the example matchings for q=(1,2,2)") {
  CHECK(deferred_acceptance(example_market(), Quotas{{1, 2, 2}}) ==
        Matching({1, 2, 2, 3, 3}, 3));
  CHECK(deferred_acceptance(example_market_perturbed(), Quotas{{1, 2, 2}}) ==
        Matching({2, 3, 3, 1, 2}, 3));
}

TEST_CASE("DA with a vacancy at j2 confines the perturbation to one student") {
  const Matching base = deferred_acceptance(example_market(), Quotas{{1, 3, 2}});
  const Matching pert = deferred_acceptance(example_market_perturbed(), Quotas{{1, 3, 2}});
  CHECK(base == Matching({1, 2, 2, 3, 3}, 3));
  int changed = 0;
  for (int i = 0; i < 5; ++i) changed += base.of(i) != pert.of(i);
  CHECK(changed == 1);
  CHECK(base.of(0) != pert.of(0));
}

TEST_CASE("DA leaves everyone unmatched when every student is unacceptable") {
  PreferenceProfile profile({{1, 2, 0}, {2, 1, 0}}, {{0, 1, 2}, {0, 2, 1}});
  CHECK(deferred_acceptance(profile, Quotas{{1, 1}}) == Matching({0, 0}, 2));
}

TEST_CASE("DA output is the student-optimal member of the stable set") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const auto stable_set = enumerate_stable_matchings(profile, quotas);
    const Matching sosm = deferred_acceptance(profile, quotas);
    CHECK(std::count(stable_set.begin(), stable_set.end(), sosm) == 1);
    for (const auto& mu : stable_set)
      for (int i = 0; i < n; ++i)
        CHECK(profile.student_rank(i, sosm.of(i)) <= profile.student_rank(i, mu.of(i)));
  }
}

TEST_CASE("DA output does not depend on proposal order") {
  // Relabeling students permutes the proposal schedule; the matching must
  // commute with the relabeling.
  Rng rng(103);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const Matching sosm = deferred_acceptance(profile, quotas);

    std::vector<int> perm = testutil::random_permutation(n, rng);  // new index of old student
    std::vector<std::vector<int>> students(n);
    for (int i = 0; i < n; ++i) students[perm[i]] = profile.student_list(i);
    std::vector<std::vector<int>> colleges(m);
    for (int j = 0; j < m; ++j) {
      colleges[j] = profile.college_list(j + 1);
      for (int& e : colleges[j])
        if (e != 0) e = perm[e - 1] + 1;
    }
    const Matching relabeled =
        deferred_acceptance(PreferenceProfile(students, colleges), quotas);
    for (int i = 0; i < n; ++i) CHECK(relabeled.of(perm[i]) == sosm.of(i));
  }
}

TEST_CASE("college-proposing DA lands in the stable set and is college-optimal") {
  Rng rng(107);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const auto stable_set = enumerate_stable_matchings(profile, quotas);
    const Matching copt = deferred_acceptance_college_proposing(profile, quotas);
    CHECK(std::count(stable_set.begin(), stable_set.end(), copt) == 1);
    // College-optimal = student-pessimal within the stable set.
    for (const auto& mu : stable_set)
      for (int i = 0; i < n; ++i)
        CHECK(profile.student_rank(i, copt.of(i)) >= profile.student_rank(i, mu.of(i)));
  }
}

TEST_CASE("college-proposing DA agrees with DA on the example market") {
  const Matching copt =
      deferred_acceptance_college_proposing(example_market(), Quotas{{1, 2, 2}});
  CHECK(is_stable(copt, example_market(), Quotas{{1, 2, 2}}));
}

TEST_CASE("remove_student preserves relative orders") {
  const auto profile = example_market();
  const auto reduced = remove_student(profile, 2);  // drop i3
  CHECK(reduced.students() == 4);
  // Reduced student r maps to full student r < 2 ? r : r+1; check i4 vs i5
  // order at every college is preserved.
  for (CollegeId j = 1; j <= 3; ++j) {
    const bool full_order = profile.college_prefers(j, 3, 4);
    const bool reduced_order = reduced.college_prefers(j, 2, 3);
    CHECK(full_order == reduced_order);
  }
  // Cutoff position relative to the surviving students is unchanged.
  for (CollegeId j = 1; j <= 3; ++j)
    CHECK(reduced.acceptable_to_college(j, 0) == profile.acceptable_to_college(j, 0));
}

TEST_CASE("DA on a single-student market after removal returns the empty matching") {
  PreferenceProfile profile({{1, 0}}, {{1, 0}});
  const auto reduced = remove_student(profile, 0);
  CHECK(reduced.students() == 0);
  CHECK(deferred_acceptance(reduced, Quotas{{1}}).students() == 0);
}

TEST_CASE("embedding the reduced SOSM is one-envy-free in the full market") {
  Rng rng(109);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const int removed = static_cast<int>(rng.below(n));
    const auto reduced_sosm = deferred_acceptance(remove_student(profile, removed), quotas);
    const auto embedded = embed_without_student(reduced_sosm, removed);
    const auto cls = classify_matching(embedded, profile, quotas);
    CHECK((cls == StabilityClass::stable || cls == StabilityClass::one_envy_free));
    CHECK(embedded.of(removed) == 0);
  }
}

TEST_CASE("embedding the reduced example SOSM leaves only the removed student blocking") {
  const auto profile = example_market();
  const Quotas quotas{{1, 2, 2}};
  const auto reduced = deferred_acceptance(remove_student(profile, 0), quotas);
  const auto embedded = embed_without_student(reduced, 0);
  const auto pairs = blocking_pairs(embedded, profile, quotas);
  CHECK_FALSE(pairs.empty());
  for (const auto& p : pairs) CHECK(p.student == 0);
  CHECK(classify_matching(embedded, profile, quotas) == StabilityClass::one_envy_free);
}

TEST_CASE("embedding into a market where the student is universally unacceptable is stable") {
  // i2 below every cutoff: removing and re-embedding changes nothing.
  PreferenceProfile profile({{1, 0}, {1, 0}}, {{1, 0, 2}});
  const auto reduced = remove_student(profile, 1);
  const auto mu = deferred_acceptance(reduced, Quotas{{1}});
  const auto embedded = embed_without_student(mu, 1);
  CHECK(is_stable(embedded, profile, Quotas{{1}}));
}

TEST_CASE("restabilize_step is the identity on stable matchings") {
  const auto profile = example_market();
  const Matching mu({1, 2, 2, 3, 3}, 3);
  const auto result = restabilize_step(mu, profile, Quotas{{1, 2, 2}});
  CHECK_FALSE(result.step.has_value());
  CHECK(result.next == mu);
}

TEST_CASE("restabilize_step fills a vacancy without displacement") {
  // One seat each, i2 unmatched but acceptable to the vacant j2.
  PreferenceProfile profile({{1, 2, 0}, {2, 1, 0}}, {{1, 2, 0}, {2, 1, 0}});
  Matching mu({1, 0}, 2);
  const auto result = restabilize_step(mu, profile, Quotas{{1, 1}});
  REQUIRE(result.step.has_value());
  CHECK(result.step->satisfied == BlockingPair{1, 2});
  CHECK_FALSE(result.step->displaced.has_value());
  CHECK(is_stable(result.next, profile, Quotas{{1, 1}}));
}

TEST_CASE("restabilize_step rejects matchings that are not one-envy-free") {
  PreferenceProfile profile({{2, 1, 0}, {1, 2, 0}}, {{2, 1, 0}, {1, 2, 0}});
  Matching mu({1, 2}, 2);  // two distinct matched blockers
  CHECK_THROWS_AS(restabilize_step(mu, profile, Quotas{{1, 1}}), std::invalid_argument);
}

TEST_CASE("restabilize replays the example displacement chain") {
  const auto profile = example_market();
  const Quotas quotas{{1, 2, 2}};
  const Matching sosm = deferred_acceptance(profile, quotas);
  // Remove i1, re-embed, and re-stabilize: must land exactly on the SOSM.
  const auto reduced = deferred_acceptance(remove_student(profile, 0), quotas);
  const auto embedded = embed_without_student(reduced, 0);
  const auto [result, trace] = restabilize(embedded, profile, quotas);
  CHECK(result == sosm);
  // Steps satisfy student-maximal pairs; the displaced student of one step
  // is the blocker of the next.
  for (std::size_t s = 1; s < trace.steps.size(); ++s) {
    REQUIRE(trace.steps[s - 1].displaced.has_value());
    CHECK(*trace.steps[s - 1].displaced == trace.steps[s].satisfied.student);
  }
}

TEST_CASE("restabilize equals DA after any single removal (equilibration)") {
  Rng rng(113);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(6));
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const Matching sosm = deferred_acceptance(profile, quotas);
    const int removed = static_cast<int>(rng.below(n));
    const auto reduced = deferred_acceptance(remove_student(profile, removed), quotas);
    const auto embedded = embed_without_student(reduced, removed);
    const auto [result, trace] = restabilize(embedded, profile, quotas);
    CHECK(result == sosm);
  }
}

TEST_CASE("restabilize traces improve exactly one college per step") {
  Rng rng(127);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));
    const int m = 2 + static_cast<int>(rng.below(2));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const int removed = static_cast<int>(rng.below(n));
    const auto reduced = deferred_acceptance(remove_student(profile, removed), quotas);
    Matching current = embed_without_student(reduced, removed);
    while (true) {
      const auto result = restabilize_step(current, profile, quotas);
      if (!result.step.has_value()) break;
      // Exactly one college's roster changes, by admitting the blocker and
      // possibly dropping its worst member.
      const CollegeId entered = result.step->satisfied.college;
      for (CollegeId j = 1; j <= m; ++j) {
        if (j == entered) continue;
        CHECK(result.next.roster(j) == current.roster(j));
      }
      const int blocker = result.step->satisfied.student;
      CHECK(result.next.of(blocker) == entered);
      if (result.step->displaced.has_value()) {
        CHECK(current.of(*result.step->displaced) == entered);
        CHECK(result.next.of(*result.step->displaced) == 0);
        // The admitted student is strictly better for the college.
        CHECK(profile.college_prefers(entered, blocker, *result.step->displaced));
      }
      current = result.next;
    }
    CHECK(is_stable(current, profile, quotas));
  }
}

TEST_CASE("related market splits quotas into ordered positions") {
  const auto profile = example_market();
  const Quotas quotas{{1, 2, 2}};
  const auto rm = to_related_one_to_one(profile, quotas);
  CHECK(rm.positions() == 5);
  CHECK(rm.quotas.values == std::vector<int>(5, 1));
  // Students prefer the lower-indexed position of the same college.
  for (int i = 0; i < 5; ++i) {
    CHECK(rm.profile.student_rank(i, rm.first_position[2]) <
          rm.profile.student_rank(i, rm.first_position[2] + 1));
    CHECK(rm.profile.student_rank(i, rm.first_position[3]) <
          rm.profile.student_rank(i, rm.first_position[3] + 1));
  }
}

TEST_CASE("related market round-trips the example SOSM") {
  const auto profile = example_market();
  const Quotas quotas{{1, 2, 2}};
  const auto rm = to_related_one_to_one(profile, quotas);
  const Matching sosm = deferred_acceptance(profile, quotas);
  CHECK(rm.from_related(rm.to_related(sosm)) == sosm);
}

TEST_CASE("stability transfers to the related one-to-one market and back") {
  Rng rng(131);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int m = 1 + static_cast<int>(rng.below(3));
    const auto profile = testutil::random_profile(n, m, rng);
    const auto quotas = testutil::random_quotas(m, 2, rng);
    const auto rm = to_related_one_to_one(profile, quotas);
    for (const auto& mu : enumerate_stable_matchings(profile, quotas)) {
      const Matching bar = rm.to_related(mu);
      CHECK(is_stable(bar, rm.profile, rm.quotas));
      CHECK(rm.from_related(bar) == mu);
    }
    // And the related market's DA projects back onto the original SOSM.
    const Matching bar_sosm = deferred_acceptance(rm.profile, rm.quotas);
    CHECK(rm.from_related(bar_sosm) == deferred_acceptance(profile, quotas));
  }
}

TEST_CASE("perturbation_diff on identical matchings is zero") {
  const Matching mu({1, 2, 2, 3, 3}, 3);
  const auto d = perturbation_diff(mu, mu, 5);
  CHECK(d.total_changed_students == 0);
  CHECK(d.max_per_college() == 0);
  CHECK(d.k == 5);
}

TEST_CASE("perturbation_diff reproduces the example displacement counts") {
  const Matching mu({1, 2, 2, 3, 3}, 3);
  const Matching mu_prime({2, 3, 3, 1, 2}, 3);
  const auto d = perturbation_diff(mu, mu_prime, 4);
  CHECK(d.total_changed_students == 5);
  CHECK(d.per_college_indicator_change[2] == 4);  // i1, i2, i3 leave or enter j2, i5 enters
  CHECK(d.per_college_indicator_change[0] == 0);
}

TEST_CASE("perturbation_diff counts the single change in the slack-quota example") {
  const Matching mu({1, 2, 2, 3, 3}, 3);
  const Matching mu_prime({2, 2, 2, 3, 3}, 3);
  CHECK(perturbation_diff(mu, mu_prime, 0).total_changed_students == 1);
}
