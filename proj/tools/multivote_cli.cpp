// Command-line front end: solve, winner queries, free-ride detection,
// whole-election audits, the Euclidean simulation sweep, and fixture dumps.
// Exit codes: 0 success, 1 domain error (validation/budget/parse), 2 usage.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multivote/multivote.hpp"

namespace {

using namespace multivote;

std::string read_input(const std::string& path, const std::string& inline_json) {
  if (!inline_json.empty()) return inline_json;
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

SolverBudget budget_from_env() {
  SolverBudget budget;
  if (const char* env = std::getenv("MULTIVOTE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || value == 0) {
      throw ValidationError("MULTIVOTE_BUDGET must be a positive integer");
    }
    budget.max_outcomes = value;
  }
  return budget;
}

int resolve_candidate(const Election& e, int issue, const std::string& text) {
  if (issue < 0 || issue >= e.issue_count()) {
    throw ValidationError("issue index out of range");
  }
  const auto& cands = e.issues[static_cast<std::size_t>(issue)].candidates;
  const auto it = std::find(cands.begin(), cands.end(), text);
  if (it != cands.end()) return static_cast<int>(it - cands.begin());
  try {
    std::size_t pos = 0;
    const int idx = std::stoi(text, &pos);
    if (pos == text.size() && idx >= 0 && idx < static_cast<int>(cands.size())) return idx;
  } catch (const std::exception&) {
  }
  throw ValidationError("no candidate '" + text + "' in issue " + std::to_string(issue));
}

struct ElectionArgs {
  std::string input;
  std::string inline_json;
  std::string rule;

  void attach(CLI::App* cmd, bool rule_required = true) {
    auto* input_opt = cmd->add_option("-i,--input", input, "election JSON file, or - for stdin");
    auto* json_opt = cmd->add_option("--json", inline_json, "inline election JSON");
    input_opt->excludes(json_opt);
    json_opt->excludes(input_opt);
    auto* rule_opt = cmd->add_option("-r,--rule", rule, "voting rule, e.g. thiele:pav@opt");
    if (rule_required) rule_opt->required();
  }

  Election load() const {
    if (input.empty() && inline_json.empty()) {
      throw ValidationError("provide an election via --input or --json");
    }
    return parse_election(read_input(input, inline_json));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-issue approval voting: OWA/Thiele rules and free-riding analysis"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "compute the winning outcome");
  ElectionArgs solve_args;
  solve_args.attach(solve_cmd);

  // winner
  auto* winner_cmd = app.add_subcommand("winner", "does a candidate win its issue?");
  ElectionArgs winner_args;
  winner_args.attach(winner_cmd);
  int winner_issue = 0;
  std::string winner_candidate;
  winner_cmd->add_option("--issue", winner_issue, "issue index (0-based)")->required();
  winner_cmd->add_option("--candidate", winner_candidate, "candidate label or index")->required();

  // freeride
  auto* freeride_cmd = app.add_subcommand("freeride", "find free-ride deviations for a voter");
  ElectionArgs freeride_args;
  freeride_args.attach(freeride_cmd);
  int freeride_voter = 0;
  int freeride_issue = -1;
  bool freeride_generalized = false;
  freeride_cmd->add_option("--voter", freeride_voter, "voter index (0-based)")->required();
  freeride_cmd->add_option("--issue", freeride_issue, "restrict to one issue (default: all)");
  freeride_cmd->add_flag("--generalized", freeride_generalized,
                         "allow the dropped winner to be replaced by another approved one");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "flag every (voter, issue) free-ride pair");
  ElectionArgs audit_args;
  audit_args.attach(audit_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Euclidean free-riding risk experiment");
  GeometryConfig geometry;
  long long sim_elections = 1000;
  std::string sim_rules;
  int sim_jobs = 1;
  bool sim_pooled = false;
  std::string sim_out;
  std::string sim_svg;
  std::string sim_records;
  sim_cmd->add_option("--seed", geometry.seed, "RNG seed");
  sim_cmd->add_option("--voters", geometry.voters, "voters per election");
  sim_cmd->add_option("--issues", geometry.issues, "issues per election");
  sim_cmd->add_option("--candidates", geometry.candidates, "candidates per issue");
  sim_cmd->add_option("--slack", geometry.slack, "approval radius multiplier");
  sim_cmd->add_option("--elections", sim_elections, "number of sampled elections");
  sim_cmd->add_option("--rules", sim_rules,
                      "comma-separated sequential rules (default: full x grids)");
  sim_cmd->add_option("-j,--jobs", sim_jobs, "worker threads");
  sim_cmd->add_flag("--q3-pooled", sim_pooled, "pool voters across elections for q3");
  sim_cmd->add_option("-o,--output", sim_out, "CSV output path (default: stdout)");
  sim_cmd->add_option("--svg", sim_svg, "also write an SVG plot here");
  sim_cmd->add_option("--records", sim_records, "also write per-voter JSON-lines here");

  // fixture
  auto* fixture_cmd = app.add_subcommand("fixture", "dump a built-in construction");
  std::string fixture_name;
  bool fixture_list = false;
  fixture_cmd->add_option("name", fixture_name, "fixture name");
  fixture_cmd->add_flag("--list", fixture_list, "list available fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) {
      const Election e = solve_args.load();
      const RuleSpec rule = parse_rule(solve_args.rule);
      const SolveResult result = solve(e, rule, budget_from_env());
      std::cout << solve_result_to_json(e, rule, result).dump(2) << "\n";
    } else if (winner_cmd->parsed()) {
      const Election e = winner_args.load();
      const RuleSpec rule = parse_rule(winner_args.rule);
      const int candidate = resolve_candidate(e, winner_issue, winner_candidate);
      const bool wins = winner_of_issue(e, rule, winner_issue, candidate, budget_from_env());
      std::cout << (wins ? "true" : "false") << "\n";
    } else if (freeride_cmd->parsed()) {
      const Election e = freeride_args.load();
      const RuleSpec rule = parse_rule(freeride_args.rule);
      FindOptions opt;
      opt.generalized = freeride_generalized;
      opt.budget = budget_from_env();
      if (freeride_voter < 0 || freeride_voter >= e.voter_count) {
        throw ValidationError("voter index out of range");
      }
      std::vector<int> issues;
      if (freeride_cmd->count("--issue") > 0) {
        issues.push_back(freeride_issue);
      } else {
        for (int i = 0; i < e.issue_count(); ++i) issues.push_back(i);
      }
      Json findings = Json::array();
      for (int issue : issues) {
        for (const FreeRideFinding& f : find_free_rides(e, rule, freeride_voter, issue, opt)) {
          findings.push_back(finding_to_json(f));
        }
      }
      Json out;
      out["rule"] = format_rule(rule);
      out["voter"] = freeride_voter;
      out["generalized"] = freeride_generalized;
      out["findings"] = std::move(findings);
      std::cout << out.dump(2) << "\n";
    } else if (audit_cmd->parsed()) {
      const Election e = audit_args.load();
      const RuleSpec rule = parse_rule(audit_args.rule);
      FindOptions opt;
      opt.budget = budget_from_env();
      const AuditReport report = audit_election(e, rule, opt);
      std::cout << audit_report_to_json(report, rule).dump(2) << "\n";
    } else if (sim_cmd->parsed()) {
      ExperimentConfig cfg;
      cfg.geometry = geometry;
      cfg.elections = sim_elections;
      cfg.rules = sim_rules.empty() ? default_sim_rules(geometry.voters)
                                    : parse_sim_rules(sim_rules, geometry.voters);
      cfg.jobs = sim_jobs;
      cfg.pooled_q3 = sim_pooled;
      cfg.collect_records = !sim_records.empty();
      const ExperimentResult result = run_experiment(cfg);
      write_output(sim_out, emit_csv(result.rows));
      if (!sim_svg.empty()) write_output(sim_svg, emit_svg_plot(result.rows));
      if (!sim_records.empty()) write_output(sim_records, emit_records_jsonl(result.records));
    } else if (fixture_cmd->parsed()) {
      if (fixture_list) {
        for (const std::string& name : fixture_names()) std::cout << name << "\n";
      } else if (fixture_name.empty()) {
        std::cerr << "error: fixture name required (try --list)\n";
        return 2;
      } else {
        std::cout << fixture_to_json(make_fixture(fixture_name)).dump(2) << "\n";
      }
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
