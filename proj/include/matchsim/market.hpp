#pragma once

#include <optional>
#include <string>
#include <vector>

namespace matchsim::core {

// Students are 0-based indices. Colleges are ids 1..m and 0 means unmatched
// (students) or the acceptability cutoff (college preference lists). College
// preference lists store "entries": entry 0 is the cutoff, entry s+1 is
// student s.
using CollegeId = int;

inline constexpr CollegeId kUnmatched = 0;

struct Quotas {
  std::vector<int> values;  // values[j-1] = capacity of college j

  int colleges() const { return static_cast<int>(values.size()); }
  int of(CollegeId j) const { return values[static_cast<std::size_t>(j) - 1]; }
  int total() const {
    int s = 0;
    for (int q : values) s += q;
    return s;
  }
  bool valid() const {
    for (int q : values)
      if (q < 1) return false;
    return true;
  }
};

class Matching {
 public:
  Matching() = default;
  Matching(std::vector<CollegeId> assignment, int colleges);

  int students() const { return static_cast<int>(assignment_.size()); }
  int colleges() const { return static_cast<int>(rosters_.size()) - 1; }
  CollegeId of(int student) const { return assignment_[student]; }
  const std::vector<CollegeId>& assignment() const { return assignment_; }
  // Roster of college j (j in 1..m); index 0 holds the unmatched students.
  const std::vector<int>& roster(CollegeId j) const { return rosters_[j]; }
  int fill(CollegeId j) const { return static_cast<int>(rosters_[j].size()); }

  bool operator==(const Matching& other) const { return assignment_ == other.assignment_; }

 private:
  std::vector<CollegeId> assignment_;
  std::vector<std::vector<int>> rosters_;
};

// Strict preference profile. Orders are permutations: student_order[i] of
// {0..m} (position = rank, most preferred first), college_order[j-1] of
// entries {0..n}. Students ranked after entry 0 are unacceptable to the
// college; colleges ranked after 0 are worse than staying unmatched.
class PreferenceProfile {
 public:
  PreferenceProfile() = default;
  PreferenceProfile(std::vector<std::vector<int>> student_order,
                    std::vector<std::vector<int>> college_order);

  int students() const { return n_; }
  int colleges() const { return m_; }

  const std::vector<int>& student_list(int i) const { return student_order_[i]; }
  const std::vector<int>& college_list(CollegeId j) const { return college_order_[j - 1]; }

  int student_rank(int i, CollegeId j) const {
    return student_rank_[static_cast<std::size_t>(i) * (m_ + 1) + j];
  }
  int student_outside_rank(int i) const { return student_rank(i, 0); }
  int college_rank(CollegeId j, int student) const {
    return college_rank_[static_cast<std::size_t>(j - 1) * (n_ + 1) + student + 1];
  }
  int college_cutoff_rank(CollegeId j) const {
    return college_rank_[static_cast<std::size_t>(j - 1) * (n_ + 1)];
  }

  bool student_prefers(int i, CollegeId a, CollegeId b) const {
    return student_rank(i, a) < student_rank(i, b);
  }
  bool college_prefers(CollegeId j, int s1, int s2) const {
    return college_rank(j, s1) < college_rank(j, s2);
  }
  bool acceptable_to_college(CollegeId j, int student) const {
    return college_rank(j, student) < college_cutoff_rank(j);
  }
  bool acceptable_to_student(int i, CollegeId j) const {
    return student_rank(i, j) < student_outside_rank(i);
  }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<int>> student_order_;
  std::vector<std::vector<int>> college_order_;
  std::vector<int> student_rank_;  // n x (m+1)
  std::vector<int> college_rank_;  // m x (n+1), slot 0 = cutoff
};

struct BlockingPair {
  int student;
  CollegeId college;

  bool operator==(const BlockingPair& o) const {
    return student == o.student && college == o.college;
  }
};

struct Validity {
  bool ok = true;
  CollegeId over_quota_college = 0;  // first violating college when !ok
  std::string message;
};

enum class StabilityClass {
  stable,
  one_envy_free,
  envy_free,
  individually_rational,
  unstable,
};

const char* to_string(StabilityClass c);

struct RankDiffWitness {
  int first_entry;   // college-list entry encoding: 0 = cutoff, s+1 = student s
  int second_entry;
  CollegeId college;  // college whose list realizes the max gap
};

struct RankDiffReport {
  int h = 0;
  std::optional<RankDiffWitness> witness;
};

Validity validate_matching(const Matching& matching, const Quotas& quotas);

std::vector<BlockingPair> blocking_pairs(const Matching& matching,
                                         const PreferenceProfile& profile,
                                         const Quotas& quotas);

bool is_individually_rational(const Matching& matching, const PreferenceProfile& profile);

bool is_stable(const Matching& matching, const PreferenceProfile& profile, const Quotas& quotas);

StabilityClass classify_matching(const Matching& matching, const PreferenceProfile& profile,
                                 const Quotas& quotas);

struct EnumerationLimits {
  int max_students = 8;
  int max_colleges = 4;
};

// Exhaustive stable set for small markets; assignments enumerated in
// lexicographic order. Throws std::invalid_argument above the caps.
std::vector<Matching> enumerate_stable_matchings(const PreferenceProfile& profile,
                                                 const Quotas& quotas,
                                                 const EnumerationLimits& limits = {});

// Maximum rank gap, at any college, over pairs of entries whose relative
// order some two colleges dispute; 0 when no pair is disputed.
RankDiffReport max_rank_difference(const PreferenceProfile& profile);

}  // namespace matchsim::core
