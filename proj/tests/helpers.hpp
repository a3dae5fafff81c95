#pragma once

// Shared helpers for the test suite: seeded random small elections and
// common rule pools for the property suites.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "multivote/core.hpp"
#include "multivote/scoring.hpp"

namespace testutil {

using multivote::Election;
using multivote::IssueSpec;

// Random election with voters <= 5, issues <= 4, |candidates| <= 3.
// Ballots may be empty; tie-break orders are random permutations.
inline Election random_election(std::mt19937& rng, bool random_tiebreaks = true) {
  std::uniform_int_distribution<int> voters_dist(1, 5);
  std::uniform_int_distribution<int> issues_dist(1, 4);
  std::uniform_int_distribution<int> cands_dist(1, 3);
  const int n = voters_dist(rng);
  const int k = issues_dist(rng);
  static const std::vector<std::string> kLabels = {"a", "b", "c"};
  std::vector<IssueSpec> issues;
  for (int i = 0; i < k; ++i) {
    const int m = cands_dist(rng);
    IssueSpec spec;
    spec.candidates.assign(kLabels.begin(), kLabels.begin() + m);
    if (random_tiebreaks) {
      spec.tiebreak.resize(static_cast<std::size_t>(m));
      for (int c = 0; c < m; ++c) spec.tiebreak[static_cast<std::size_t>(c)] = c;
      std::shuffle(spec.tiebreak.begin(), spec.tiebreak.end(), rng);
    }
    issues.push_back(std::move(spec));
  }
  std::vector<std::vector<std::vector<int>>> approvals(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (int i = 0; i < k; ++i) {
      std::vector<int> ballot;
      const int m = issues[static_cast<std::size_t>(i)].candidate_count();
      for (int c = 0; c < m; ++c) {
        if (std::uniform_int_distribution<int>(0, 1)(rng)) ballot.push_back(c);
      }
      approvals[static_cast<std::size_t>(v)].push_back(std::move(ballot));
    }
  }
  return multivote::make_election(std::move(issues), std::move(approvals));
}

// A mixed pool of rules for cross-checking solvers, parameterized by the
// election's voter and issue counts (needed for the OWA vector lengths).
inline std::vector<multivote::RuleSpec> rule_pool(int n, int k, multivote::RuleMode mode) {
  using multivote::ComparatorKind;
  using multivote::OwaFamily;
  using multivote::RuleSpec;
  using multivote::ThieleFunction;
  std::vector<RuleSpec> rules;
  rules.push_back(RuleSpec::thiele_rule(ThieleFunction::utilitarian(), mode));
  rules.push_back(RuleSpec::thiele_rule(ThieleFunction::pav(), mode));
  rules.push_back(RuleSpec::thiele_rule(ThieleFunction::power_decay(0.5), mode));
  rules.push_back(RuleSpec::thiele_rule(ThieleFunction::lex_simulated(k, n), mode));
  rules.push_back(RuleSpec::comparator_rule(ComparatorKind::egalitarian, 0, mode));
  rules.push_back(RuleSpec::comparator_rule(ComparatorKind::leximin, 0, mode));
  rules.push_back(RuleSpec::comparator_rule(ComparatorKind::hybrid, std::max(1, n / 2), mode));
  rules.push_back(RuleSpec::owa_rule(
      multivote::owa_family_vector(OwaFamily::leximin, n, k), mode));
  return rules;
}

}  // namespace testutil
