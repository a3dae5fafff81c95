#pragma once

// Free-riding detection and classification.
//
// A deviation by voter v on issue set I is a free-ride when, on every issue
// in I, v truthfully approves the truthful winner, drops it from her ballot,
// and the winner nevertheless stays in place (generalized: is replaced by
// some other candidate v truthfully approves). Findings are classified by
// the satisfaction change measured against v's *truthful* ballots:
// successful (> 0), harmful (< 0), neutral (= 0).
//
// For sequential rules with nonnegative weights, testing the empty ballot on
// each targeted issue is enough: a candidate only gains score from ballots
// that approve it, so the truthful winner survives some replacement ballot
// iff it survives the empty one, and every surviving replacement yields the
// same downstream outcome. Optimization rules get full enumeration over
// replacement ballots instead, which is why they stay desk-scale here.

#include <optional>

#include "core.hpp"
#include "scoring.hpp"
#include "solvers.hpp"

namespace multivote {

enum class FreeRideClass { successful, harmful, neutral };

inline const char* to_string(FreeRideClass c) {
  switch (c) {
    case FreeRideClass::successful:
      return "successful";
    case FreeRideClass::harmful:
      return "harmful";
    case FreeRideClass::neutral:
      return "neutral";
  }
  return "?";
}

struct FreeRideFinding {
  int voter = 0;
  std::vector<int> issues;
  Deviation deviation;
  Outcome truthful_outcome;
  Outcome deviated_outcome;
  int delta_sat = 0;
  FreeRideClass cls = FreeRideClass::neutral;
  bool generalized = false;
};

struct FindOptions {
  bool generalized = false;
  bool force_enumeration = false;  // tests: bypass the sequential fast path
  int ballot_cap = 12;             // max candidates per issue when enumerating ballots
  SolverBudget budget;
};

namespace detail {

inline bool fast_path_applies(const RuleSpec& rule, const FindOptions& opt) {
  if (rule.mode != RuleMode::sequential || opt.generalized || opt.force_enumeration) return false;
  // Comparator and Thiele rules have nonnegative weights by construction;
  // raw OWA vectors are checked (their type invariant already demands it).
  if (rule.is_owa_vector() && !rule.owa().nonnegative()) return false;
  return true;
}

inline FreeRideClass classify(int delta) {
  if (delta > 0) return FreeRideClass::successful;
  if (delta < 0) return FreeRideClass::harmful;
  return FreeRideClass::neutral;
}

// Checks the free-ride conditions of a solved deviation and builds the
// finding. `truthful` and `deviated` are R(E) and R(E*).
inline std::optional<FreeRideFinding> check_conditions(const Election& e, const Deviation& dev,
                                                       const Outcome& truthful,
                                                       const Outcome& deviated, bool generalized) {
  const auto& row = e.approvals[static_cast<std::size_t>(dev.voter)];
  std::vector<int> issues;
  for (const auto& [issue, ballot] : dev.replacements) {
    const int w = truthful[static_cast<std::size_t>(issue)];
    if (!ballot_contains(row[static_cast<std::size_t>(issue)], w)) return std::nullopt;
    if (ballot_contains(ballot, w)) return std::nullopt;
    const int new_winner = deviated[static_cast<std::size_t>(issue)];
    if (generalized) {
      if (!ballot_contains(row[static_cast<std::size_t>(issue)], new_winner)) return std::nullopt;
    } else {
      if (new_winner != w) return std::nullopt;
    }
    issues.push_back(issue);
  }
  FreeRideFinding finding;
  finding.voter = dev.voter;
  finding.issues = std::move(issues);
  finding.deviation = dev;
  finding.truthful_outcome = truthful;
  finding.deviated_outcome = deviated;
  finding.delta_sat =
      satisfaction(e, dev.voter, deviated) - satisfaction(e, dev.voter, truthful);
  finding.cls = classify(finding.delta_sat);
  finding.generalized = generalized;
  return finding;
}

}  // namespace detail

// Tests whether one concrete deviation is a free-ride under the rule.
inline std::optional<FreeRideFinding> is_free_ride(const Election& e, const RuleSpec& rule,
                                                   const Deviation& dev, bool generalized = false,
                                                   const SolverBudget& budget = {}) {
  require_valid(e);
  const Election deviated_election = apply_deviation(e, dev);  // validates the deviation
  const Outcome truthful = solve(e, rule, budget).outcome;
  const Outcome deviated = solve(deviated_election, rule, budget).outcome;
  return detail::check_conditions(e, dev, truthful, deviated, generalized);
}

// All free-rides of `voter` on `issue`. On the sequential fast path this is
// the single empty-ballot representative (or nothing); otherwise every
// replacement ballot over the issue's other candidates is tried, in
// ascending bitmask order.
inline std::vector<FreeRideFinding> find_free_rides(const Election& e, const RuleSpec& rule,
                                                    int voter, int issue,
                                                    const FindOptions& opt = {}) {
  require_valid(e);
  if (voter < 0 || voter >= e.voter_count) throw ValidationError("voter index out of range");
  if (issue < 0 || issue >= e.issue_count()) throw ValidationError("issue index out of range");
  const Outcome truthful = solve(e, rule, opt.budget).outcome;
  const int w = truthful[static_cast<std::size_t>(issue)];
  const auto& ballot = e.approvals[static_cast<std::size_t>(voter)][static_cast<std::size_t>(issue)];
  if (!ballot_contains(ballot, w)) return {};

  std::vector<FreeRideFinding> findings;
  if (detail::fast_path_applies(rule, opt)) {
    Deviation dev{voter, {{issue, {}}}};
    if (auto finding = is_free_ride(e, rule, dev, /*generalized=*/false, opt.budget)) {
      findings.push_back(std::move(*finding));
    }
    return findings;
  }

  const int m = e.issues[static_cast<std::size_t>(issue)].candidate_count();
  if (m > opt.ballot_cap) {
    throw BudgetError("issue has " + std::to_string(m) + " candidates, over the ballot cap of " +
                      std::to_string(opt.ballot_cap));
  }
  std::vector<int> others;
  for (int c = 0; c < m; ++c) {
    if (c != w) others.push_back(c);
  }
  const std::uint32_t masks = std::uint32_t(1) << others.size();
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    std::vector<int> replacement;
    for (std::size_t j = 0; j < others.size(); ++j) {
      if (mask & (std::uint32_t(1) << j)) replacement.push_back(others[j]);
    }
    Deviation dev{voter, {{issue, std::move(replacement)}}};
    if (auto finding = is_free_ride(e, rule, dev, opt.generalized, opt.budget)) {
      findings.push_back(std::move(*finding));
    }
  }
  return findings;
}

inline bool recognize_free_riding(const Election& e, const RuleSpec& rule, int voter, int issue,
                                  const FindOptions& opt = {}) {
  return !find_free_rides(e, rule, voter, issue, opt).empty();
}

struct ManipulationResult {
  bool possible = false;
  std::optional<FreeRideFinding> witness;
};

// Searches for a *successful* free-ride by `voter`. Single-issue mode scans
// issues in index order; multi-issue mode additionally tries every nonempty
// subset of the eligible issues (sequential rules: one empty-ballot deviation
// per subset; otherwise the full ballot product, guarded by the solve cap).
inline ManipulationResult can_manipulate_by_free_riding(const Election& e, const RuleSpec& rule,
                                                        int voter, bool single_issue_only = true,
                                                        const FindOptions& opt = {}) {
  require_valid(e);
  if (voter < 0 || voter >= e.voter_count) throw ValidationError("voter index out of range");
  if (single_issue_only) {
    for (int issue = 0; issue < e.issue_count(); ++issue) {
      for (FreeRideFinding& finding : find_free_rides(e, rule, voter, issue, opt)) {
        if (finding.cls == FreeRideClass::successful) {
          return ManipulationResult{true, std::move(finding)};
        }
      }
    }
    return {};
  }

  const Outcome truthful = solve(e, rule, opt.budget).outcome;
  std::vector<int> eligible;
  for (int issue = 0; issue < e.issue_count(); ++issue) {
    const auto& ballot =
        e.approvals[static_cast<std::size_t>(voter)][static_cast<std::size_t>(issue)];
    if (ballot_contains(ballot, truthful[static_cast<std::size_t>(issue)])) {
      eligible.push_back(issue);
    }
  }
  if (eligible.size() > 20) {
    throw BudgetError("too many eligible issues for multi-issue search: " +
                      std::to_string(eligible.size()));
  }
  const bool fast = detail::fast_path_applies(rule, opt);
  std::uint64_t solves = 0;
  const std::uint64_t solve_cap = std::uint64_t(1) << 16;
  for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << eligible.size()); ++mask) {
    std::vector<int> subset;
    for (std::size_t j = 0; j < eligible.size(); ++j) {
      if (mask & (std::uint32_t(1) << j)) subset.push_back(eligible[j]);
    }
    if (fast) {
      Deviation dev;
      dev.voter = voter;
      for (int issue : subset) dev.replacements[issue] = {};
      if (++solves > solve_cap) throw BudgetError("multi-issue search exceeded its solve cap");
      if (auto finding = is_free_ride(e, rule, dev, /*generalized=*/false, opt.budget)) {
        if (finding->cls == FreeRideClass::successful) {
          return ManipulationResult{true, std::move(*finding)};
        }
      }
      continue;
    }
    // Enumerate replacement ballots per issue in the subset (product space).
    std::vector<std::vector<std::vector<int>>> choices;
    for (int issue : subset) {
      const int m = e.issues[static_cast<std::size_t>(issue)].candidate_count();
      if (m > opt.ballot_cap) {
        throw BudgetError("issue has " + std::to_string(m) +
                          " candidates, over the ballot cap of " + std::to_string(opt.ballot_cap));
      }
      std::vector<int> others;
      for (int c = 0; c < m; ++c) {
        if (c != truthful[static_cast<std::size_t>(issue)]) others.push_back(c);
      }
      std::vector<std::vector<int>> ballots;
      for (std::uint32_t bm = 0; bm < (std::uint32_t(1) << others.size()); ++bm) {
        std::vector<int> ballot;
        for (std::size_t j = 0; j < others.size(); ++j) {
          if (bm & (std::uint32_t(1) << j)) ballot.push_back(others[j]);
        }
        ballots.push_back(std::move(ballot));
      }
      choices.push_back(std::move(ballots));
    }
    std::vector<std::size_t> pick(choices.size(), 0);
    while (true) {
      Deviation dev;
      dev.voter = voter;
      for (std::size_t j = 0; j < subset.size(); ++j) {
        dev.replacements[subset[j]] = choices[j][pick[j]];
      }
      if (++solves > solve_cap) throw BudgetError("multi-issue search exceeded its solve cap");
      if (auto finding = is_free_ride(e, rule, dev, opt.generalized, opt.budget)) {
        if (finding->cls == FreeRideClass::successful) {
          return ManipulationResult{true, std::move(*finding)};
        }
      }
      std::size_t j = 0;
      while (j < pick.size() && ++pick[j] == choices[j].size()) {
        pick[j] = 0;
        ++j;
      }
      if (j == pick.size()) break;
    }
  }
  return {};
}

struct AuditPair {
  int voter = 0;
  int issue = 0;
  bool successful = false;
  bool harmful = false;

  bool operator==(const AuditPair&) const = default;
};

struct VoterAudit {
  int successful_issues = 0;
  int harmful_issues = 0;

  bool operator==(const VoterAudit&) const = default;
};

struct AuditReport {
  std::vector<AuditPair> pairs;  // only pairs where some free-ride exists, (voter, issue) order
  std::vector<VoterAudit> per_voter;
  std::vector<FreeRideFinding> representatives;  // one finding per listed pair
};

namespace detail {

// Shared audit core. Sequential rules ride the engine restart path: the
// truthful solve is done once, and each candidate (voter, issue) pair costs
// one partial re-solve from that issue onward.
template <typename PairFn>
void audit_pairs(const Election& e, const RuleSpec& rule, const FindOptions& opt, PairFn&& fn) {
  if (fast_path_applies(rule, opt)) {
    SeqEngine engine(e, rule);
    const SeqEngine::SolveData truthful = engine.solve(/*with_trace=*/false);
    const Outcome& outcome = truthful.result.outcome;
    const std::vector<int> empty_ballot;
    for (int v = 0; v < e.voter_count; ++v) {
      const auto& row = e.approvals[static_cast<std::size_t>(v)];
      const int truthful_sat = satisfaction(e, v, outcome);
      for (int i = 0; i < e.issue_count(); ++i) {
        const int w = outcome[static_cast<std::size_t>(i)];
        if (!ballot_contains(row[static_cast<std::size_t>(i)], w)) continue;
        BallotOverride ov{v, i, &empty_ballot};
        Outcome prefix(outcome.begin(), outcome.begin() + i);
        std::optional<Outcome> deviated = engine.resolve_from(
            i, std::move(prefix), truthful.sats_before[static_cast<std::size_t>(i)], ov, w);
        if (!deviated) continue;
        const int delta = satisfaction(e, v, *deviated) - truthful_sat;
        FreeRideFinding finding;
        finding.voter = v;
        finding.issues = {i};
        finding.deviation = Deviation{v, {{i, {}}}};
        finding.truthful_outcome = outcome;
        finding.deviated_outcome = std::move(*deviated);
        finding.delta_sat = delta;
        finding.cls = classify(delta);
        finding.generalized = false;
        fn(v, i, std::vector<FreeRideFinding>{std::move(finding)});
      }
    }
    return;
  }
  for (int v = 0; v < e.voter_count; ++v) {
    for (int i = 0; i < e.issue_count(); ++i) {
      std::vector<FreeRideFinding> findings = find_free_rides(e, rule, v, i, opt);
      if (!findings.empty()) fn(v, i, std::move(findings));
    }
  }
}

}  // namespace detail

// Flags every (voter, issue) pair that admits a free-ride, with per-class
// possibility flags, per-voter issue counts and one representative finding
// per pair. Sequential rules are audited via the fast path; optimization
// rules enumerate ballots per pair and are only suitable at desk scale.
inline AuditReport audit_election(const Election& e, const RuleSpec& rule,
                                  const FindOptions& opt = {}) {
  require_valid(e);
  AuditReport report;
  report.per_voter.assign(static_cast<std::size_t>(e.voter_count), VoterAudit{});
  detail::audit_pairs(e, rule, opt, [&](int v, int i, std::vector<FreeRideFinding> findings) {
    AuditPair pair{v, i, false, false};
    for (const FreeRideFinding& finding : findings) {
      if (finding.cls == FreeRideClass::successful) pair.successful = true;
      if (finding.cls == FreeRideClass::harmful) pair.harmful = true;
    }
    if (pair.successful) ++report.per_voter[static_cast<std::size_t>(v)].successful_issues;
    if (pair.harmful) ++report.per_voter[static_cast<std::size_t>(v)].harmful_issues;
    report.pairs.push_back(pair);
    report.representatives.push_back(std::move(findings.front()));
  });
  return report;
}

}  // namespace multivote
