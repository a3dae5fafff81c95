#pragma once

// Core types for multi-issue approval elections: k independent issues, each
// with its own candidate set, n voters casting one approval ballot per issue.
// An outcome selects exactly one candidate per issue.

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace multivote {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed elections, outcomes, deviations or rule parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Instance exceeds a solver budget (outcome-space or enumeration caps).
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Bad rule strings or malformed JSON documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

// One issue: candidate display labels plus a tie-break permutation.
// tiebreak[r] is the candidate index preferred at rank r (earlier = preferred).
struct IssueSpec {
  std::vector<std::string> candidates;
  std::vector<int> tiebreak;  // permutation of 0..candidates.size()-1

  int candidate_count() const { return static_cast<int>(candidates.size()); }

  static std::vector<int> identity_tiebreak(int m) {
    std::vector<int> t(static_cast<std::size_t>(m));
    std::iota(t.begin(), t.end(), 0);
    return t;
  }

  bool operator==(const IssueSpec&) const = default;
};

// approvals[v][i] is voter v's approval set on issue i, as candidate indices.
// Sets are kept sorted and duplicate-free; empty ballots are permitted.
struct Election {
  std::vector<IssueSpec> issues;
  int voter_count = 0;
  std::vector<std::vector<std::vector<int>>> approvals;

  int issue_count() const { return static_cast<int>(issues.size()); }

  bool operator==(const Election&) const = default;
};

// winners[i] is the selected candidate index on issue i.
using Outcome = std::vector<int>;

// Voter satisfactions sorted in nondecreasing order; length = voter_count.
using SortedSatVector = std::vector<int>;

// A unilateral ballot change: `replacements` maps issue index to the new
// approval set of `voter` on that issue (all other ballots stay put).
struct Deviation {
  int voter = 0;
  std::map<int, std::vector<int>> replacements;

  bool operator==(const Deviation&) const = default;
};

inline std::vector<std::string> validate(const Election& e) {
  std::vector<std::string> problems;
  if (e.issues.empty()) problems.push_back("election has no issues");
  if (e.voter_count < 1) problems.push_back("voter_count must be >= 1");
  for (std::size_t i = 0; i < e.issues.size(); ++i) {
    const IssueSpec& spec = e.issues[i];
    const std::string where = "issue " + std::to_string(i);
    if (spec.candidates.empty()) problems.push_back(where + " has no candidates");
    const int m = spec.candidate_count();
    if (static_cast<int>(spec.tiebreak.size()) != m) {
      problems.push_back(where + " tiebreak length != candidate count");
    } else {
      std::vector<bool> seen(static_cast<std::size_t>(m), false);
      for (int c : spec.tiebreak) {
        if (c < 0 || c >= m || seen[static_cast<std::size_t>(c)]) {
          problems.push_back(where + " tiebreak is not a permutation");
          break;
        }
        seen[static_cast<std::size_t>(c)] = true;
      }
    }
  }
  if (static_cast<int>(e.approvals.size()) != e.voter_count) {
    problems.push_back("approvals rows != voter_count");
    return problems;  // row shape is broken; do not index into it
  }
  for (int v = 0; v < e.voter_count; ++v) {
    const auto& row = e.approvals[static_cast<std::size_t>(v)];
    if (row.size() != e.issues.size()) {
      problems.push_back("voter " + std::to_string(v) + " has wrong issue count");
      continue;
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      const int m = e.issues[i].candidate_count();
      const auto& set = row[i];
      for (std::size_t j = 0; j < set.size(); ++j) {
        if (set[j] < 0 || set[j] >= m) {
          problems.push_back("voter " + std::to_string(v) + " issue " +
                             std::to_string(i) + " approves unknown candidate");
          break;
        }
        if (j > 0 && set[j] <= set[j - 1]) {
          problems.push_back("voter " + std::to_string(v) + " issue " +
                             std::to_string(i) + " ballot not sorted/unique");
          break;
        }
      }
    }
  }
  return problems;
}

inline void require_valid(const Election& e) {
  std::vector<std::string> problems = validate(e);
  if (problems.empty()) return;
  std::string msg = "invalid election:";
  for (const std::string& p : problems) msg += " " + p + ";";
  throw ValidationError(msg);
}

inline bool outcome_valid(const Election& e, const Outcome& w) {
  if (w.size() != e.issues.size()) return false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0 || w[i] >= e.issues[i].candidate_count()) return false;
  }
  return true;
}

inline void require_outcome(const Election& e, const Outcome& w) {
  if (!outcome_valid(e, w)) throw ValidationError("outcome does not match election shape");
}

inline bool ballot_contains(const std::vector<int>& ballot, int candidate) {
  return std::find(ballot.begin(), ballot.end(), candidate) != ballot.end();
}

// Number of issues where the outcome picks a candidate voter v approves.
inline int satisfaction(const Election& e, int voter, const Outcome& w) {
  if (voter < 0 || voter >= e.voter_count) throw ValidationError("voter index out of range");
  require_outcome(e, w);
  const auto& row = e.approvals[static_cast<std::size_t>(voter)];
  int sat = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (ballot_contains(row[i], w[i])) ++sat;
  }
  return sat;
}

inline SortedSatVector sorted_sat_vector(const Election& e, const Outcome& w) {
  require_outcome(e, w);
  SortedSatVector sats(static_cast<std::size_t>(e.voter_count), 0);
  for (int v = 0; v < e.voter_count; ++v) {
    const auto& row = e.approvals[static_cast<std::size_t>(v)];
    int sat = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (ballot_contains(row[i], w[i])) ++sat;
    }
    sats[static_cast<std::size_t>(v)] = sat;
  }
  std::sort(sats.begin(), sats.end());
  return sats;
}

inline std::vector<int> normalize_ballot(std::vector<int> ballot) {
  std::sort(ballot.begin(), ballot.end());
  ballot.erase(std::unique(ballot.begin(), ballot.end()), ballot.end());
  return ballot;
}

// Returns a copy of e with the deviating voter's ballots replaced. The input
// election, voter index, issue indices and replacement sets are all checked.
inline Election apply_deviation(const Election& e, const Deviation& d) {
  require_valid(e);
  if (d.voter < 0 || d.voter >= e.voter_count) throw ValidationError("deviation voter out of range");
  if (d.replacements.empty()) throw ValidationError("deviation replaces no ballots");
  Election out = e;
  for (const auto& [issue, ballot] : d.replacements) {
    if (issue < 0 || issue >= e.issue_count()) throw ValidationError("deviation issue out of range");
    const int m = e.issues[static_cast<std::size_t>(issue)].candidate_count();
    std::vector<int> norm = normalize_ballot(ballot);
    for (int c : norm) {
      if (c < 0 || c >= m) throw ValidationError("deviation ballot has unknown candidate");
    }
    out.approvals[static_cast<std::size_t>(d.voter)][static_cast<std::size_t>(issue)] = std::move(norm);
  }
  return out;
}

// Positions of each candidate in an issue's tie-break order (rank 0 = best).
inline std::vector<int> tiebreak_ranks(const IssueSpec& spec) {
  std::vector<int> rank(spec.candidates.size(), 0);
  for (std::size_t r = 0; r < spec.tiebreak.size(); ++r) {
    rank[static_cast<std::size_t>(spec.tiebreak[r])] = static_cast<int>(r);
  }
  return rank;
}

// Total order over outcomes: compare issue by issue, preferring the candidate
// with the better (smaller) tie-break rank. `less` means a precedes b, i.e. a
// is the one deterministic tie-breaking would select.
inline std::strong_ordering compare_outcomes_tiebreak(const Outcome& a, const Outcome& b,
                                                      const Election& e) {
  require_outcome(e, a);
  require_outcome(e, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::vector<int> rank = tiebreak_ranks(e.issues[i]);
    const int ra = rank[static_cast<std::size_t>(a[i])];
    const int rb = rank[static_cast<std::size_t>(b[i])];
    if (ra != rb) return ra < rb ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

// Convenience builder: issues given as (labels, optional tiebreak) plus one
// ballot list per voter per issue. Ballots are normalized; result is checked.
inline Election make_election(std::vector<IssueSpec> issues,
                              std::vector<std::vector<std::vector<int>>> approvals) {
  Election e;
  for (IssueSpec& spec : issues) {
    if (spec.tiebreak.empty()) spec.tiebreak = IssueSpec::identity_tiebreak(spec.candidate_count());
  }
  e.issues = std::move(issues);
  e.voter_count = static_cast<int>(approvals.size());
  e.approvals = std::move(approvals);
  for (auto& row : e.approvals) {
    for (auto& ballot : row) ballot = normalize_ballot(std::move(ballot));
  }
  require_valid(e);
  return e;
}

}  // namespace multivote
