#pragma once

// Canned elections with known free-riding behavior, used as regression
// fixtures and CLI demos. Each generator pins candidate labels, tie-break
// orders and the deviation, and freezes the expected truthful/deviated
// winners and the finding class the solvers must reproduce.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "freeride.hpp"
#include "scoring.hpp"

namespace multivote {

struct Fixture {
  std::string name;
  Election election;
  RuleSpec rule = RuleSpec::thiele_rule(ThieleFunction::utilitarian(), RuleMode::optimization);
  Outcome expected_truthful;
  std::optional<Deviation> deviation;
  std::optional<Outcome> expected_deviated;
  std::optional<FreeRideClass> expected_class;
  std::optional<int> expected_delta;
  std::string note;
};

namespace detail {

inline bool thiele_strictly_drops(const ThieleFunction& f, int i) {
  if (f.exact()) return f.value_exact(i) > f.value_exact(i + 1);
  return f.value(i) > f.value(i + 1);
}

inline std::vector<std::string> numbered_labels(const std::vector<int>& global, int /*n*/) {
  std::vector<std::string> labels;
  for (int g : global) labels.push_back("a" + std::to_string(g));
  return labels;
}

}  // namespace detail

// 100 voters, four issues over {a, b, c}: 66 voters approve a everywhere,
// 33 approve b, one approves c. The utilitarian optimum picks a four times;
// leximin picks (a,a,b,c); PAV picks (a,a,a,b).
inline Fixture running_example() {
  Fixture fx;
  fx.name = "running-example";
  std::vector<IssueSpec> issues(4, IssueSpec{{"a", "b", "c"}, {}});
  std::vector<std::vector<std::vector<int>>> approvals;
  for (int v = 0; v < 66; ++v) approvals.push_back({{0}, {0}, {0}, {0}});
  for (int v = 0; v < 33; ++v) approvals.push_back({{1}, {1}, {1}, {1}});
  approvals.push_back({{2}, {2}, {2}, {2}});
  fx.election = make_election(std::move(issues), std::move(approvals));
  fx.rule = RuleSpec::thiele_rule(ThieleFunction::utilitarian(), RuleMode::optimization);
  fx.expected_truthful = {0, 0, 0, 0};
  fx.note = "one-sided blocks of 66/33/1 voters; see tests for leximin and PAV optima";
  return fx;
}

// Two issues, three voters. Everyone approves a on issue 0; on issue 1 the
// voters split over {x, y, z}. The egalitarian optimum with index tie-break
// is (a, x); voter 1 can drop a on issue 0 and force (a, y), gaining one.
inline Fixture egal_free_ride_example() {
  Fixture fx;
  fx.name = "egal-freeride";
  fx.election = make_election({IssueSpec{{"a", "b"}, {}}, IssueSpec{{"x", "y", "z"}, {}}},
                              {{{0}, {0}}, {{0}, {1}}, {{0}, {2}}});
  fx.rule = RuleSpec::comparator_rule(ComparatorKind::egalitarian, 0, RuleMode::optimization);
  fx.expected_truthful = {0, 0};
  fx.deviation = Deviation{1, {{0, {1}}}};
  fx.expected_deviated = {0, 1};
  fx.expected_class = FreeRideClass::successful;
  fx.expected_delta = 1;
  fx.note = "voter 1 rides on a's guaranteed win to flip issue 1 to y";
  return fx;
}

namespace detail {

// Shared election of the sequential/optimization Thiele manipulations:
// k+1 issues over {a, b}, four voters; everyone approves a on the first k
// issues, the last issue splits 2-2 between b (voters 0, 1) and a. Ties
// prefer a. Requires the smallest k >= 2 with f(k-1) > f(k); the final
// round additionally needs f(k) > f(k+1), which holds for every strictly
// decreasing family (PAV, power decay) this is instantiated with.
inline Fixture thiele_manipulation_base(const ThieleFunction& f, const char* name,
                                        RuleMode mode) {
  int k = -1;
  for (int cand = 2; cand <= 64; ++cand) {
    if (thiele_strictly_drops(f, cand - 1)) {
      k = cand;
      break;
    }
  }
  if (k < 0) {
    throw ValidationError("Thiele function never strictly decreases; no manipulation exists");
  }
  if (!thiele_strictly_drops(f, k)) {
    throw ValidationError("construction needs f(k) > f(k+1) at its witness k");
  }
  Fixture fx;
  fx.name = name;
  std::vector<IssueSpec> issues(static_cast<std::size_t>(k) + 1, IssueSpec{{"a", "b"}, {}});
  std::vector<std::vector<std::vector<int>>> approvals(4);
  for (int v = 0; v < 4; ++v) {
    for (int i = 0; i < k; ++i) approvals[static_cast<std::size_t>(v)].push_back({0});
    approvals[static_cast<std::size_t>(v)].push_back(v < 2 ? std::vector<int>{1}
                                                           : std::vector<int>{0});
  }
  fx.election = make_election(std::move(issues), std::move(approvals));
  fx.rule = RuleSpec::thiele_rule(f, mode);
  fx.expected_truthful.assign(static_cast<std::size_t>(k) + 1, 0);
  // Sequential: free-ride on the first issue. Optimization: on issue k-1.
  const int target = mode == RuleMode::sequential ? 0 : k - 1;
  fx.deviation = Deviation{0, {{target, {1}}}};
  fx.expected_deviated.emplace(static_cast<std::size_t>(k) + 1, 0);
  fx.expected_deviated->back() = 1;
  fx.expected_class = FreeRideClass::successful;
  fx.expected_delta = 1;
  fx.note = "voter 0 drops a on a safe issue and tips the contested last issue to b";
  return fx;
}

// Shared election of the OWA manipulations: two issues, k voters, candidates
// a1..ak per issue. Issue 0: voters 0 and 1 approve a1, voter i approves
// a(i+1). Issue 1: voter 0 approves a1, voter 1 approves a2, everyone else
// approves both. Needs alpha_1 > alpha_k, so the hybrid family requires
// x >= 1.
inline Fixture owa_manipulation_base(const OwaComparator& alpha, int k, const char* name,
                                     RuleMode mode) {
  if (k < 3) throw ValidationError("OWA manipulation needs k >= 3 voters");
  if (alpha.kind == ComparatorKind::hybrid && alpha.x < 1) {
    throw ValidationError("hybrid x = 0 is utilitarian (alpha_1 = alpha_n); no manipulation");
  }
  Fixture fx;
  fx.name = name;
  std::vector<int> global(static_cast<std::size_t>(k));
  std::iota(global.begin(), global.end(), 1);
  std::vector<IssueSpec> issues(2, IssueSpec{numbered_labels(global, k), {}});
  std::vector<std::vector<std::vector<int>>> approvals;
  approvals.push_back({{0}, {0}});
  approvals.push_back({{0}, {1}});
  for (int v = 2; v < k; ++v) approvals.push_back({{v}, {0, 1}});
  fx.election = make_election(std::move(issues), std::move(approvals));
  fx.rule = RuleSpec::comparator_rule(alpha.kind, alpha.x, mode);
  fx.expected_truthful = {0, 0};
  fx.deviation = Deviation{1, {{0, {1}}}};
  fx.expected_deviated = {0, 1};
  fx.expected_class = FreeRideClass::successful;
  fx.expected_delta = 1;
  fx.note = "voter 1 abandons a1 on issue 0, which stays safe, and wins issue 1 for a2";
  return fx;
}

}  // namespace detail

inline Fixture seq_thiele_manipulation(const ThieleFunction& f) {
  return detail::thiele_manipulation_base(f, "seq-thiele-manip", RuleMode::sequential);
}

inline Fixture opt_thiele_manipulation(const ThieleFunction& f) {
  return detail::thiele_manipulation_base(f, "opt-thiele-manip", RuleMode::optimization);
}

inline Fixture owa_manipulation(const OwaComparator& alpha, int k) {
  return detail::owa_manipulation_base(alpha, k, "owa-manip", RuleMode::optimization);
}

inline Fixture seq_owa_manipulation(const OwaComparator& alpha, int k) {
  return detail::owa_manipulation_base(alpha, k, "seq-owa-manip", RuleMode::sequential);
}

// Nine voters over candidates a..g. After a run of unanimous issues, four
// crafted issues make voter 0's free-ride on the first contested issue
// backfire: the winners shift from (a,a,b,b) to (a,b,a,a) and voter 0 ends
// up one issue worse off. Requires the smallest i with f(i) > f(i+1).
inline Fixture seq_thiele_harmful(const ThieleFunction& f) {
  int i = -1;
  for (int cand = 1; cand <= 64; ++cand) {
    if (detail::thiele_strictly_drops(f, cand)) {
      i = cand;
      break;
    }
  }
  if (i < 0) {
    throw ValidationError("Thiele function never strictly decreases; no harmful free-ride");
  }
  Fixture fx;
  fx.name = "seq-thiele-harmful";
  const int issue_count = i + 3;
  std::vector<IssueSpec> issues(static_cast<std::size_t>(issue_count),
                                IssueSpec{{"a", "b", "c", "d", "e", "f", "g"}, {}});
  // Ballots of the four contested issues, one row per issue, voters 0..8.
  const std::vector<std::vector<std::vector<int>>> rows = {
      {{0}, {0}, {0}, {1}, {1}, {2}, {3}, {4}, {5}},
      {{1}, {0}, {2}, {1}, {1}, {0}, {0}, {0}, {1}},
      {{1}, {0}, {2}, {1}, {4}, {0}, {5}, {0, 1}, {6}},
      {{1}, {2}, {3}, {4}, {1}, {5}, {0}, {0}, {6}},
  };
  std::vector<std::vector<std::vector<int>>> approvals(9);
  for (int v = 0; v < 9; ++v) {
    for (int j = 0; j < i - 1; ++j) approvals[static_cast<std::size_t>(v)].push_back({0});
    for (const auto& row : rows) approvals[static_cast<std::size_t>(v)].push_back(row[static_cast<std::size_t>(v)]);
  }
  fx.election = make_election(std::move(issues), std::move(approvals));
  fx.rule = RuleSpec::thiele_rule(f, RuleMode::sequential);
  fx.expected_truthful.assign(static_cast<std::size_t>(issue_count), 0);
  fx.expected_truthful[static_cast<std::size_t>(i + 1)] = 1;
  fx.expected_truthful[static_cast<std::size_t>(i + 2)] = 1;
  fx.deviation = Deviation{0, {{i - 1, {}}}};
  fx.expected_deviated.emplace(static_cast<std::size_t>(issue_count), 0);
  (*fx.expected_deviated)[static_cast<std::size_t>(i)] = 1;
  fx.expected_class = FreeRideClass::harmful;
  fx.expected_delta = -1;
  fx.note = "voter 0's ride flips the next issue to b and costs the two later issues";
  return fx;
}

namespace detail {

// Election of the harmful sequential-OWA construction: n >= 8 voters, four
// issues, candidate sets restricted to the approved a1..an, ties preferring
// the higher index. The per-issue ballots follow a fixed pattern keyed by
// 1-based voter numbers.
inline Fixture seq_owa_harmful_base(int n, RuleSpec rule, const char* note) {
  if (n < 8) throw ValidationError("harmful OWA construction needs n >= 8");
  Fixture fx;
  fx.name = "seq-owa-harmful";
  // approver -> approved candidate (1-based global ids), per issue
  std::vector<std::vector<int>> wants(static_cast<std::size_t>(n), std::vector<int>(4, 0));
  for (int v = 1; v <= n; ++v) {
    auto& w = wants[static_cast<std::size_t>(v - 1)];
    w[0] = ((v >= 3 && v <= n - 3) || v == n) ? n : v;
    w[1] = (v <= 3) ? n : (v >= n - 2 ? 1 : v);
    w[2] = (v == 1 || v == 4) ? 4 : (v >= n - 1 ? n : v);
    w[3] = (v == 2 || v == 3) ? 2 : ((v == n - 2 || v == n) ? n : v);
  }
  std::vector<IssueSpec> issues;
  std::vector<std::vector<int>> locals(4);  // per issue: sorted global candidate ids
  for (int i = 0; i < 4; ++i) {
    std::vector<int> present;
    for (int v = 0; v < n; ++v) present.push_back(wants[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    locals[static_cast<std::size_t>(i)] = present;
    IssueSpec spec{numbered_labels(present, n), {}};
    spec.tiebreak.resize(present.size());
    std::iota(spec.tiebreak.rbegin(), spec.tiebreak.rend(), 0);  // higher index preferred
    issues.push_back(std::move(spec));
  }
  const auto local_of = [&](int issue, int global) {
    const auto& ids = locals[static_cast<std::size_t>(issue)];
    return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), global) - ids.begin());
  };
  std::vector<std::vector<std::vector<int>>> approvals(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (int i = 0; i < 4; ++i) {
      approvals[static_cast<std::size_t>(v)].push_back(
          {local_of(i, wants[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)])});
    }
  }
  fx.election = make_election(std::move(issues), std::move(approvals));
  fx.rule = std::move(rule);
  fx.expected_truthful = {local_of(0, n), local_of(1, n), local_of(2, n), local_of(3, n)};
  fx.deviation = Deviation{n - 1, {{0, {local_of(0, 1)}}}};
  fx.expected_deviated = {local_of(0, n), local_of(1, 1), local_of(2, 4), local_of(3, 2)};
  fx.expected_class = FreeRideClass::harmful;
  fx.expected_delta = -1;
  fx.note = note;
  return fx;
}

}  // namespace detail

// Harmful free-riding under a sequential OWA rule whose weight vector is
// nonincreasing with alpha_3 > alpha_{n-2}. The default weights are
// (1, 1, 1, 0, ..., 0); any caller-supplied vector is checked against the
// two conditions.
inline Fixture seq_owa_harmful(int n) {
  std::vector<Rational> w(static_cast<std::size_t>(n), Rational(0));
  w[0] = w[1] = w[2] = 1;
  return detail::seq_owa_harmful_base(
      n, RuleSpec::owa_rule(OwaVector::from_rationals(std::move(w)), RuleMode::sequential),
      "voter n rides on issue 0 and loses the last two issues; alpha = (1,1,1,0,...)");
}

inline Fixture seq_owa_harmful(int n, const OwaVector& alpha) {
  if (static_cast<int>(alpha.size()) != n) throw ValidationError("alpha length != n");
  if (!alpha.nonincreasing()) throw ValidationError("alpha must be nonincreasing");
  const bool strict = alpha.exact() ? (alpha.rationals()[2] > alpha.rationals()[static_cast<std::size_t>(n - 3)])
                                    : (alpha.doubles()[2] > alpha.doubles()[static_cast<std::size_t>(n - 3)]);
  if (!strict) throw ValidationError("construction needs alpha_3 > alpha_{n-2}");
  return detail::seq_owa_harmful_base(
      n, RuleSpec::owa_rule(alpha, RuleMode::sequential),
      "voter n rides on issue 0 and loses the last two issues");
}

// Same election under the leximin comparator (whose conceptual weights are
// strictly decreasing, so the conditions hold for every n >= 8).
inline Fixture seq_owa_harmful_leximin(int n) {
  return detail::seq_owa_harmful_base(
      n, RuleSpec::comparator_rule(ComparatorKind::leximin, 0, RuleMode::sequential),
      "voter n rides on issue 0 and loses the last two issues; leximin order");
}

// Five voters, five issues over {a, b, c}, ties preferring a. Sequential
// egalitarian elects (a,a,a,b,b); if voter 0 swaps her issue-1 approval from
// a to b the winners become (a,a,b,a,a) and her satisfaction drops 3 -> 2.
inline Fixture seq_egal_harmful() {
  Fixture fx;
  fx.name = "seq-egal-harmful";
  std::vector<IssueSpec> issues(5, IssueSpec{{"a", "b", "c"}, {}});
  std::vector<std::vector<std::vector<int>>> approvals = {
      {{1}, {0}, {1}, {1}, {1}},
      {{1}, {0}, {0}, {1}, {0}},
      {{1}, {0}, {0}, {2}, {1}},
      {{0}, {0}, {1}, {0}, {1}},
      {{0}, {0}, {1}, {0}, {1}},
  };
  fx.election = make_election(std::move(issues), std::move(approvals));
  fx.rule = RuleSpec::comparator_rule(ComparatorKind::egalitarian, 0, RuleMode::sequential);
  fx.expected_truthful = {0, 0, 0, 1, 1};
  fx.deviation = Deviation{0, {{1, {1}}}};
  fx.expected_deviated = {0, 0, 1, 0, 0};
  fx.expected_class = FreeRideClass::harmful;
  fx.expected_delta = -1;
  fx.note = "riding on the unanimous issue 1 flips three later rounds against voter 0";
  return fx;
}

inline std::vector<std::string> fixture_names() {
  return {"running-example", "egal-freeride",    "seq-thiele-pav",
          "opt-thiele-pav",  "owa-egal",         "seq-owa-egal",
          "seq-pav-harmful", "seq-owa-harmful",  "seq-egal-harmful"};
}

inline Fixture make_fixture(const std::string& name) {
  // The registry key becomes the fixture name, so dumps round-trip even for
  // the parameterized generators (whose own names omit the instantiation).
  const auto named = [&name](Fixture fx) {
    fx.name = name;
    return fx;
  };
  if (name == "running-example") return running_example();
  if (name == "egal-freeride") return egal_free_ride_example();
  if (name == "seq-thiele-pav") return named(seq_thiele_manipulation(ThieleFunction::pav()));
  if (name == "opt-thiele-pav") return named(opt_thiele_manipulation(ThieleFunction::pav()));
  if (name == "owa-egal") {
    return named(owa_manipulation(OwaComparator{ComparatorKind::egalitarian, 0}, 3));
  }
  if (name == "seq-owa-egal") {
    return named(seq_owa_manipulation(OwaComparator{ComparatorKind::egalitarian, 0}, 3));
  }
  if (name == "seq-pav-harmful") return named(seq_thiele_harmful(ThieleFunction::pav()));
  if (name == "seq-owa-harmful") return seq_owa_harmful(8);
  if (name == "seq-egal-harmful") return seq_egal_harmful();
  throw ParseError("unknown fixture '" + name + "'");
}

}  // namespace multivote
