#pragma once

// JSON (de)serialization for elections, solve results, free-ride findings,
// audit reports and fixtures. Serialization is canonical: fixed key order
// (via nlohmann's ordered_json), dense arrays, identity tie-breaks omitted.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "constructions.hpp"
#include "core.hpp"
#include "freeride.hpp"
#include "scoring.hpp"
#include "solvers.hpp"

namespace multivote {

using Json = nlohmann::ordered_json;

namespace detail {

inline bool is_identity(const std::vector<int>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != static_cast<int>(i)) return false;
  }
  return true;
}

inline const Json& expect(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string(where) + ": missing key '" + key + "'");
  }
  return j.at(key);
}

inline std::vector<int> int_array(const Json& j, const char* where) {
  if (!j.is_array()) throw ParseError(std::string(where) + ": expected an array");
  std::vector<int> out;
  for (const Json& item : j) {
    if (!item.is_number_integer()) {
      throw ParseError(std::string(where) + ": expected integers");
    }
    out.push_back(item.get<int>());
  }
  return out;
}

}  // namespace detail

inline Json election_to_json(const Election& e) {
  Json issues = Json::array();
  for (const IssueSpec& spec : e.issues) {
    Json issue;
    issue["candidates"] = spec.candidates;
    if (!detail::is_identity(spec.tiebreak)) issue["tiebreak"] = spec.tiebreak;
    issues.push_back(std::move(issue));
  }
  Json j;
  j["issues"] = std::move(issues);
  j["voters"] = e.voter_count;
  j["approvals"] = e.approvals;
  return j;
}

inline Election election_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("election: expected a JSON object");
  const Json& issues_json = detail::expect(j, "issues", "election");
  if (!issues_json.is_array()) throw ParseError("election: 'issues' must be an array");
  std::vector<IssueSpec> issues;
  for (const Json& issue : issues_json) {
    IssueSpec spec;
    const Json& cands = detail::expect(issue, "candidates", "issue");
    if (!cands.is_array()) throw ParseError("issue: 'candidates' must be an array");
    for (const Json& c : cands) {
      if (!c.is_string()) throw ParseError("issue: candidate labels must be strings");
      spec.candidates.push_back(c.get<std::string>());
    }
    if (issue.contains("tiebreak")) {
      spec.tiebreak = detail::int_array(issue.at("tiebreak"), "issue tiebreak");
    }
    issues.push_back(std::move(spec));
  }
  const Json& voters = detail::expect(j, "voters", "election");
  if (!voters.is_number_integer()) throw ParseError("election: 'voters' must be an integer");
  const int voter_count = voters.get<int>();
  const Json& approvals_json = detail::expect(j, "approvals", "election");
  if (!approvals_json.is_array()) throw ParseError("election: 'approvals' must be an array");
  std::vector<std::vector<std::vector<int>>> approvals;
  for (const Json& row : approvals_json) {
    if (!row.is_array()) throw ParseError("election: voter approvals must be arrays");
    std::vector<std::vector<int>> ballots;
    for (const Json& ballot : row) {
      ballots.push_back(detail::int_array(ballot, "ballot"));
    }
    approvals.push_back(std::move(ballots));
  }
  if (static_cast<int>(approvals.size()) != voter_count) {
    throw ParseError("election: 'approvals' must have one row per voter");
  }
  return make_election(std::move(issues), std::move(approvals));
}

inline Election parse_election(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("invalid JSON: ") + ex.what());
  }
  return election_from_json(j);
}

inline Json deviation_to_json(const Deviation& dev) {
  Json replacements = Json::array();
  for (const auto& [issue, ballot] : dev.replacements) {
    Json r;
    r["issue"] = issue;
    r["ballot"] = ballot;
    replacements.push_back(std::move(r));
  }
  Json j;
  j["voter"] = dev.voter;
  j["replacements"] = std::move(replacements);
  return j;
}

inline Deviation deviation_from_json(const Json& j) {
  Deviation dev;
  const Json& voter = detail::expect(j, "voter", "deviation");
  if (!voter.is_number_integer()) throw ParseError("deviation: 'voter' must be an integer");
  dev.voter = voter.get<int>();
  const Json& reps = detail::expect(j, "replacements", "deviation");
  if (!reps.is_array()) throw ParseError("deviation: 'replacements' must be an array");
  for (const Json& r : reps) {
    const Json& issue = detail::expect(r, "issue", "replacement");
    if (!issue.is_number_integer()) throw ParseError("replacement: 'issue' must be an integer");
    dev.replacements[issue.get<int>()] =
        detail::int_array(detail::expect(r, "ballot", "replacement"), "replacement ballot");
  }
  return dev;
}

inline std::vector<std::string> outcome_labels(const Election& e, const Outcome& outcome) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    labels.push_back(e.issues[i].candidates[static_cast<std::size_t>(outcome[i])]);
  }
  return labels;
}

inline Json solve_result_to_json(const Election& e, const RuleSpec& rule,
                                 const SolveResult& result) {
  Json j;
  j["rule"] = format_rule(rule);
  j["outcome"] = result.outcome;
  j["winners"] = outcome_labels(e, result.outcome);
  j["sat_vector"] = result.sat;
  if (result.score) j["score"] = result.score->str();
  return j;
}

inline Json finding_to_json(const FreeRideFinding& f) {
  Json j;
  j["voter"] = f.voter;
  j["issues"] = f.issues;
  j["deviation"] = deviation_to_json(f.deviation);
  j["truthful_outcome"] = f.truthful_outcome;
  j["deviated_outcome"] = f.deviated_outcome;
  j["delta_sat"] = f.delta_sat;
  j["class"] = to_string(f.cls);
  j["generalized"] = f.generalized;
  return j;
}

inline Json audit_report_to_json(const AuditReport& report, const RuleSpec& rule) {
  Json pairs = Json::array();
  for (const AuditPair& p : report.pairs) {
    Json pair;
    pair["voter"] = p.voter;
    pair["issue"] = p.issue;
    pair["successful"] = p.successful;
    pair["harmful"] = p.harmful;
    pairs.push_back(std::move(pair));
  }
  Json j;
  j["pairs"] = std::move(pairs);
  j["rule"] = format_rule(rule);
  return j;
}

inline Json fixture_to_json(const Fixture& fx) {
  Json j;
  j["name"] = fx.name;
  j["election"] = election_to_json(fx.election);
  j["rule"] = format_rule(fx.rule);
  j["expected_truthful"] = fx.expected_truthful;
  if (fx.deviation) j["deviation"] = deviation_to_json(*fx.deviation);
  if (fx.expected_deviated) j["expected_deviated"] = *fx.expected_deviated;
  if (fx.expected_class) j["expected_class"] = to_string(*fx.expected_class);
  if (fx.expected_delta) j["expected_delta"] = *fx.expected_delta;
  j["note"] = fx.note;
  return j;
}

}  // namespace multivote
