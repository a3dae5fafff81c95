// Release gate: exercises the six acceptance checks end to end and prints
// one PASS/FAIL line per check. Exit code = number of failures.
// argv[1] must be the path to the CLI binary (used by checks 5 and 6).

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "multivote/multivote.hpp"

namespace fs = std::filesystem;
using namespace multivote;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "multivote_acceptance";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const fs::path err_path = scratch_dir() / "stderr.txt";
  const std::string cmd = "'" + g_cli + "' " + args + " 2>'" + err_path.string() + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw Failure("popen failed for: " + cmd);
  RunResult result;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, got);
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream err(err_path, std::ios::binary);
  result.err.assign(std::istreambuf_iterator<char>(err), std::istreambuf_iterator<char>());
  return result;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Golden examples: exact outcomes and scores on the two worked elections.

std::string check_golden_examples() {
  const auto t0 = Clock::now();
  const Election running = running_example().election;

  const Outcome util = solve(running, parse_rule("thiele:util@opt")).outcome;
  require(outcome_labels(running, util) == std::vector<std::string>{"a", "a", "a", "a"},
          "utilitarian winners != (a,a,a,a)");

  const Outcome lex = solve(running, parse_rule("owa:leximin@opt")).outcome;
  require(outcome_labels(running, lex) == std::vector<std::string>{"a", "a", "b", "c"},
          "leximin winners != (a,a,b,c)");

  const ScoreValue pav = thiele_score(ThieleFunction::pav(), running, Outcome{0, 0, 0, 1});
  require(pav.str() == "154", "PAV score of (a,a,a,b) != 154, got " + pav.str());

  const Fixture egal = egal_free_ride_example();
  const auto finding = is_free_ride(egal.election, egal.rule, *egal.deviation);
  require(finding.has_value(), "egalitarian drop is not recognized as a free-ride");
  require(outcome_labels(egal.election, finding->deviated_outcome) ==
              std::vector<std::string>{"a", "y"},
          "egalitarian free-ride outcome != (a,y)");
  require(finding->cls == FreeRideClass::successful && finding->delta_sat == 1,
          "egalitarian free-ride not successful");

  const double dt = seconds_since(t0);
  require(dt < 1.0, "golden examples took " + fmt(dt) + "s (budget 1s)");
  return fmt(dt) + "s";
}

// ---------------------------------------------------------------------------
// 2. Construction fixtures: manipulable instances with frozen winner
//    sequences for both rule families and both solver modes.

void check_fixture(const std::string& name, FreeRideClass cls, int delta) {
  const Fixture fx = make_fixture(name);
  require(solve(fx.election, fx.rule).outcome == fx.expected_truthful,
          name + ": truthful outcome mismatch");
  const auto finding = is_free_ride(fx.election, fx.rule, *fx.deviation);
  require(finding.has_value(), name + ": deviation is not a free-ride");
  require(finding->deviated_outcome == *fx.expected_deviated,
          name + ": deviated outcome mismatch");
  require(finding->cls == cls, name + ": wrong class");
  require(finding->delta_sat == delta, name + ": wrong satisfaction delta");

  // The search rediscovers the planted deviation's class.
  const auto& [issue, ballot] = *fx.deviation->replacements.begin();
  bool found = false;
  for (const FreeRideFinding& f :
       find_free_rides(fx.election, fx.rule, fx.deviation->voter, issue)) {
    if (f.cls == cls) found = true;
  }
  require(found, name + ": enumeration missed the planted deviation");
}

std::string check_construction_fixtures() {
  for (const char* name : {"seq-thiele-pav", "opt-thiele-pav", "owa-egal", "seq-owa-egal"}) {
    check_fixture(name, FreeRideClass::successful, 1);
  }
  check_fixture("seq-pav-harmful", FreeRideClass::harmful, -1);
  check_fixture("seq-owa-harmful", FreeRideClass::harmful, -1);
  check_fixture("seq-egal-harmful", FreeRideClass::harmful, -1);

  // The egalitarian gadget's exact winner sequences and satisfaction drop.
  const Fixture fx = make_fixture("seq-egal-harmful");
  require(outcome_labels(fx.election, fx.expected_truthful) ==
              std::vector<std::string>{"a", "a", "a", "b", "b"},
          "seq-egal-harmful: truthful labels != (a,a,a,b,b)");
  require(outcome_labels(fx.election, *fx.expected_deviated) ==
              std::vector<std::string>{"a", "a", "b", "a", "a"},
          "seq-egal-harmful: deviated labels != (a,a,b,a,a)");
  require(satisfaction(fx.election, 0, fx.expected_truthful) == 3 &&
              satisfaction(fx.election, 0, *fx.expected_deviated) == 2,
          "seq-egal-harmful: satisfaction should fall 3 -> 2");
  return "7 fixtures";
}

// ---------------------------------------------------------------------------
// 3. Property suites over random small elections (>= 200 instances each).

std::string check_property_suites() {
  const auto t0 = Clock::now();
  constexpr int kTrials = 250;

  // (a) The leximin comparator and the explicit leximin OWA vector pick the
  //     same optimum under exact rationals.
  {
    std::mt19937 rng(20260815);
    for (int t = 0; t < kTrials; ++t) {
      const Election e = testutil::random_election(rng);
      const RuleSpec cmp =
          RuleSpec::comparator_rule(ComparatorKind::leximin, 0, RuleMode::optimization);
      const RuleSpec vec = RuleSpec::owa_rule(
          owa_family_vector(OwaFamily::leximin, e.voter_count, e.issue_count()),
          RuleMode::optimization);
      require(solve(e, cmp).outcome == solve(e, vec).outcome,
              "(a) leximin comparator and vector argmax differ, trial " + std::to_string(t));
    }
  }

  // (b) Utilitarian rules admit only neutral free-rides.
  {
    std::mt19937 rng(7);
    long long findings_seen = 0;
    for (int t = 0; t < kTrials; ++t) {
      const Election e = testutil::random_election(rng);
      for (const RuleMode mode : {RuleMode::optimization, RuleMode::sequential}) {
        const RuleSpec rule = RuleSpec::thiele_rule(ThieleFunction::utilitarian(), mode);
        for (int v = 0; v < e.voter_count; ++v) {
          for (int i = 0; i < e.issue_count(); ++i) {
            for (const FreeRideFinding& f : find_free_rides(e, rule, v, i)) {
              require(f.delta_sat == 0 && f.cls == FreeRideClass::neutral,
                      "(b) non-neutral utilitarian free-ride, trial " + std::to_string(t));
              ++findings_seen;
            }
          }
        }
      }
    }
    require(findings_seen > 0, "(b) vacuous: no utilitarian free-rides sampled");
  }

  // (c) Optimization-mode leximin free-rides never hurt the free-rider.
  {
    std::mt19937 rng(11);
    const RuleSpec rule =
        RuleSpec::comparator_rule(ComparatorKind::leximin, 0, RuleMode::optimization);
    for (int t = 0; t < kTrials; ++t) {
      const Election e = testutil::random_election(rng);
      for (int v = 0; v < e.voter_count; ++v) {
        for (int i = 0; i < e.issue_count(); ++i) {
          for (const FreeRideFinding& f : find_free_rides(e, rule, v, i)) {
            require(f.delta_sat >= 0,
                    "(c) harmful leximin@opt free-ride, trial " + std::to_string(t));
          }
        }
      }
    }
  }

  // (d) Pruning never changes the optimum.
  {
    std::mt19937 rng(13);
    SolverBudget no_prune;
    no_prune.enable_pruning = false;
    for (int t = 0; t < kTrials; ++t) {
      const Election e = testutil::random_election(rng);
      for (const RuleSpec& rule :
           testutil::rule_pool(e.voter_count, e.issue_count(), RuleMode::optimization)) {
        const SolveResult pruned = solve(e, rule);
        const SolveResult exhaustive = solve(e, rule, no_prune);
        require(pruned.outcome == exhaustive.outcome && pruned.sat == exhaustive.sat,
                "(d) pruned and exhaustive solves differ, trial " + std::to_string(t));
      }
    }
  }

  // (e) The sequential fast path (empty replacement only) agrees with brute
  //     force over every replacement ballot B.
  {
    std::mt19937 rng(17);
    FindOptions forced;
    forced.force_enumeration = true;
    for (int t = 0; t < kTrials; ++t) {
      const Election e = testutil::random_election(rng);
      for (const char* text : {"thiele:pav@seq", "owa:leximin@seq"}) {
        const RuleSpec rule = parse_rule(text);
        for (int v = 0; v < e.voter_count; ++v) {
          for (int i = 0; i < e.issue_count(); ++i) {
            const auto fast = find_free_rides(e, rule, v, i);
            const auto full = find_free_rides(e, rule, v, i, forced);
            require(fast.empty() == full.empty(),
                    "(e) fast path and enumeration disagree on existence, trial " +
                        std::to_string(t));
            if (fast.empty()) continue;
            require(fast.size() == 1, "(e) fast path returned several findings");
            for (const FreeRideFinding& f : full) {
              require(f.delta_sat == fast[0].delta_sat && f.cls == fast[0].cls &&
                          f.deviated_outcome == fast[0].deviated_outcome,
                      "(e) some replacement ballot deviates from the fast path, trial " +
                          std::to_string(t));
            }
          }
        }
      }
    }
  }

  const double dt = seconds_since(t0);
  require(dt < 60.0, "property suites took " + fmt(dt) + "s (budget 60s)");
  return "5 suites x " + std::to_string(kTrials) + " instances, " + fmt(dt) + "s";
}

// ---------------------------------------------------------------------------
// 4. Simulation: the published risk levels for sequential PAV and leximin,
//    plus exact immunity at x=0 and rising manipulability in x.

std::string check_simulation_targets() {
  ExperimentConfig cfg;
  cfg.geometry.seed = 42;
  cfg.elections = 1000;
  cfg.rules = parse_sim_rules("thiele:pow:0,thiele:pow:1,owa:hybrid:0,owa:hybrid:1,owa:hybrid:19",
                              cfg.geometry.voters);
  const ExperimentResult result = run_experiment(cfg);
  const MetricsRow& pow0 = result.rows[0];
  const MetricsRow& pav = result.rows[1];
  const MetricsRow& hyb0 = result.rows[2];
  const MetricsRow& hyb1 = result.rows[3];
  const MetricsRow& leximin = result.rows[4];

  for (const MetricsRow* row : {&pow0, &hyb0}) {
    require(row->q1 == 0.0 && row->q2 == 0.0 && row->q3 == 0.0 && row->eligible_voters == 0,
            row->family + " at x=0 must be exactly immune");
  }
  require(pav.q3 >= 0.022 && pav.q3 <= 0.052,
          "sequential PAV q3=" + fmt(pav.q3) + " outside [0.022, 0.052]");
  require(leximin.q3 >= 0.142 && leximin.q3 <= 0.202,
          "sequential leximin q3=" + fmt(leximin.q3) + " outside [0.142, 0.202]");
  require(pow0.q1 < pav.q1 && pow0.q2 < pav.q2,
          "Thiele q1/q2 must rise strictly from x=0 to x=1");
  require(hyb0.q1 < hyb1.q1 && hyb0.q2 < hyb1.q2,
          "OWA q1/q2 must rise strictly from x=0 to x=1");
  return "pav q3=" + fmt(pav.q3) + ", leximin q3=" + fmt(leximin.q3);
}

// ---------------------------------------------------------------------------
// 5. Determinism: the CSV is byte-identical across worker counts.

std::string check_jobs_determinism() {
  const RunResult one = run_cli("simulate --seed 7 --jobs 1");
  require(one.status == 0, "simulate --jobs 1 failed: " + one.err);
  const RunResult eight = run_cli("simulate --seed 7 --jobs 8");
  require(eight.status == 0, "simulate --jobs 8 failed: " + eight.err);
  require(!one.out.empty(), "simulate produced no CSV");
  require(one.out == eight.out, "CSV differs between --jobs 1 and --jobs 8");
  return std::to_string(one.out.size()) + " identical bytes";
}

// ---------------------------------------------------------------------------
// 6. Hardness-respecting failure: a 4^20 outcome space must be refused.

std::string check_budget_refusal() {
  std::vector<IssueSpec> issues(20, IssueSpec{{"c0", "c1", "c2", "c3"}, {}});
  std::vector<std::vector<std::vector<int>>> approvals(1);
  for (int i = 0; i < 20; ++i) approvals[0].push_back({0});
  const Election e = make_election(std::move(issues), std::move(approvals));

  const fs::path path = scratch_dir() / "huge.json";
  std::ofstream(path, std::ios::binary) << election_to_json(e).dump();
  const RunResult r = run_cli("solve -i '" + path.string() + "' -r thiele:pav@opt");
  require(r.status == 1, "expected exit code 1, got " + std::to_string(r.status));
  require(r.err.find("budget") != std::string::npos,
          "stderr lacks a budget message: " + r.err);
  require(r.out.empty(), "a refused solve must not print an outcome");
  return "refused 4^20 outcomes";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli-binary>\n";
    return 64;
  }
  g_cli = argv[1];

  const std::vector<std::pair<const char*, std::function<std::string()>>> checks = {
      {"1 golden examples", check_golden_examples},
      {"2 construction fixtures", check_construction_fixtures},
      {"3 property suites", check_property_suites},
      {"4 simulation targets", check_simulation_targets},
      {"5 jobs determinism", check_jobs_determinism},
      {"6 budget refusal", check_budget_refusal},
  };

  int failures = 0;
  for (const auto& [name, fn] : checks) {
    try {
      const std::string note = fn();
      std::cout << "PASS  " << name << (note.empty() ? "" : " (" + note + ")") << "\n";
    } catch (const std::exception& ex) {
      std::cout << "FAIL  " << name << ": " << ex.what() << "\n";
      ++failures;
    }
    std::cout.flush();
  }
  return failures;
}
