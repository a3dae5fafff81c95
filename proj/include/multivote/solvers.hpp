#pragma once

// Solvers for both rule modes.
//
// Optimization mode enumerates outcomes depth-first in per-issue tie-break
// order, so the first maximum encountered is the tie-break-minimal maximizer.
// Thiele rules get an admissible branch-and-bound (each undecided issue is
// bounded by the best marginal any of its candidates could still add, which
// never underestimates because satisfactions only grow and f is
// nonincreasing). Comparator and raw-OWA rules are enumerated exhaustively.
// The outcome-space size is checked against the budget up front; instances
// over budget fail loudly instead of being approximated.
//
// Sequential mode decides issues in index order, each round keeping the first
// candidate (in tie-break order) whose evaluation is strictly best. Trace
// entries record, per candidate, the sorted satisfaction vector it would
// produce and, for scalar rules, its score (the round marginal for Thiele,
// the partial-outcome OWA score for weight vectors).

#include <cstdint>
#include <functional>
#include <optional>

#include "core.hpp"
#include "scoring.hpp"

namespace multivote {

struct SolverBudget {
  std::uint64_t max_outcomes = std::uint64_t(1) << 24;
  bool enable_pruning = true;
};

struct CandidateEval {
  int candidate = 0;
  std::optional<ScoreValue> score;  // absent for comparator rules
  SortedSatVector sat;

  bool operator==(const CandidateEval&) const = default;
};

struct RoundTrace {
  int issue = 0;
  std::vector<CandidateEval> evals;  // in tie-break order
  int chosen = 0;

  bool operator==(const RoundTrace&) const = default;
};

struct SolveResult {
  Outcome outcome;
  std::optional<ScoreValue> score;  // absent for comparator rules
  SortedSatVector sat;
  std::vector<RoundTrace> trace;  // sequential mode only
};

namespace detail {

// Replaces one voter's ballot on one issue during evaluation, without
// copying the election. ballot must be sorted/unique and exclude nothing in
// particular; it is simply the set of candidates the voter now approves.
struct BallotOverride {
  int voter = -1;
  int issue = -1;
  const std::vector<int>* ballot = nullptr;

  bool active() const { return voter >= 0; }
};

inline std::uint64_t outcome_space_size(const Election& e) {
  std::uint64_t product = 1;
  for (const IssueSpec& spec : e.issues) {
    const std::uint64_t m = static_cast<std::uint64_t>(spec.candidate_count());
    if (product > (std::uint64_t(1) << 62) / std::max<std::uint64_t>(m, 1)) {
      return std::uint64_t(1) << 62;  // saturate; still compares over budget
    }
    product *= m;
  }
  return product;
}

inline void check_budget(const Election& e, const SolverBudget& budget) {
  const std::uint64_t space = outcome_space_size(e);
  if (space > budget.max_outcomes) {
    throw BudgetError("outcome space has " + std::to_string(space) +
                      " outcomes, over the budget of " + std::to_string(budget.max_outcomes));
  }
}

enum class RuleKind {
  thiele_exact,
  thiele_float,
  owa_vector_exact,
  owa_vector_float,
  cmp_egalitarian,
  cmp_leximin,
  cmp_hybrid,
};

inline RuleKind classify_rule(const RuleSpec& rule) {
  if (rule.is_thiele()) {
    return rule.thiele().exact() ? RuleKind::thiele_exact : RuleKind::thiele_float;
  }
  if (rule.is_owa_vector()) {
    return rule.owa().exact() ? RuleKind::owa_vector_exact : RuleKind::owa_vector_float;
  }
  switch (rule.comparator().kind) {
    case ComparatorKind::egalitarian:
      return RuleKind::cmp_egalitarian;
    case ComparatorKind::leximin:
      return RuleKind::cmp_leximin;
    case ComparatorKind::hybrid:
      return RuleKind::cmp_hybrid;
  }
  throw Error("unreachable");
}

inline bool is_comparator_kind(RuleKind k) {
  return k == RuleKind::cmp_egalitarian || k == RuleKind::cmp_leximin || k == RuleKind::cmp_hybrid;
}

inline std::strong_ordering compare_sorted(RuleKind kind, int x, const SortedSatVector& a,
                                           const SortedSatVector& b) {
  switch (kind) {
    case RuleKind::cmp_egalitarian:
      return egalitarian_compare(a, b);
    case RuleKind::cmp_leximin:
      return leximin_compare(a, b);
    case RuleKind::cmp_hybrid: {
      const int n = static_cast<int>(a.size());
      return hybrid_owa_compare(std::min(x, n - 1), a, b);
    }
    default:
      throw Error("not a comparator rule");
  }
}

// Per-(election, rule) evaluation engine shared by the sequential solver,
// the free-riding audit and the simulations. Holds precomputed approver
// lists and Thiele weight tables; scratch buffers make solves allocation-light.
class SeqEngine {
 public:
  SeqEngine(const Election& e, const RuleSpec& rule)
      : e_(&e), kind_(classify_rule(rule)), cmp_x_(0) {
    const int k = e.issue_count();
    approvers_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      approvers_[static_cast<std::size_t>(i)].resize(
          static_cast<std::size_t>(e.issues[static_cast<std::size_t>(i)].candidate_count()));
    }
    for (int v = 0; v < e.voter_count; ++v) {
      for (int i = 0; i < k; ++i) {
        for (int c : e.approvals[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]) {
          approvers_[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].push_back(v);
        }
      }
    }
    switch (kind_) {
      case RuleKind::thiele_exact: {
        const ThieleFunction& f = rule.thiele();
        f_exact_.resize(static_cast<std::size_t>(k) + 2);
        for (int i = 1; i <= k + 1; ++i) f_exact_[static_cast<std::size_t>(i)] = f.value_exact(i);
        break;
      }
      case RuleKind::thiele_float: {
        const ThieleFunction& f = rule.thiele();
        f_float_.resize(static_cast<std::size_t>(k) + 2, 0.0);
        for (int i = 1; i <= k + 1; ++i) f_float_[static_cast<std::size_t>(i)] = f.value(i);
        break;
      }
      case RuleKind::owa_vector_exact:
      case RuleKind::owa_vector_float:
        alpha_ = &rule.owa();
        if (static_cast<int>(alpha_->size()) != e.voter_count) {
          throw ValidationError("OWA vector length != voter count");
        }
        break;
      case RuleKind::cmp_hybrid:
        cmp_x_ = std::min(rule.comparator().x, e.voter_count - 1);
        break;
      default:
        break;
    }
  }

  const Election& election() const { return *e_; }
  RuleKind kind() const { return kind_; }

  struct SolveData {
    SolveResult result;
    std::vector<std::vector<int>> sats_before;  // sats_before[i] = satisfactions entering round i
  };

  SolveData solve(bool with_trace, const BallotOverride& ov = {}) {
    const int k = e_->issue_count();
    SolveData data;
    std::vector<int> sats(static_cast<std::size_t>(e_->voter_count), 0);
    data.sats_before.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      data.sats_before.push_back(sats);
      RoundTrace* trace = nullptr;
      if (with_trace) {
        data.result.trace.push_back(RoundTrace{i, {}, 0});
        trace = &data.result.trace.back();
      }
      const int winner = round_winner(i, sats, ov, trace);
      if (trace) trace->chosen = winner;
      data.result.outcome.push_back(winner);
      bump_sats(i, winner, sats, ov);
    }
    std::sort(sats.begin(), sats.end());
    data.result.sat = std::move(sats);
    finish_score(data.result);
    return data;
  }

  // Resumes a solve at round `start` (prefix and its satisfactions given),
  // with the override active. Returns nothing if the overridden round does
  // not keep `required_winner` in place, which is the free-ride fast-path
  // rejection without paying for the remaining rounds.
  std::optional<Outcome> resolve_from(int start, Outcome prefix, std::vector<int> sats,
                                      const BallotOverride& ov, int required_winner) {
    const int k = e_->issue_count();
    for (int i = start; i < k; ++i) {
      const int winner = round_winner(i, sats, ov, nullptr);
      if (i == start && winner != required_winner) return std::nullopt;
      prefix.push_back(winner);
      bump_sats(i, winner, sats, ov);
    }
    return prefix;
  }

  // Round evaluation exposed for trace-consistency checks.
  int round_winner(int issue, const std::vector<int>& sats, const BallotOverride& ov,
                   RoundTrace* trace) {
    const IssueSpec& spec = e_->issues[static_cast<std::size_t>(issue)];
    int winner = -1;
    Rational best_exact;
    double best_float = 0;
    best_vec_.clear();
    for (int c : spec.tiebreak) {
      bool better = false;
      std::optional<ScoreValue> trace_score;
      switch (kind_) {
        case RuleKind::thiele_exact: {
          Rational marginal = 0;
          for_each_approver(issue, c, ov, [&](int v) {
            marginal += f_exact_[static_cast<std::size_t>(sats[static_cast<std::size_t>(v)] + 1)];
          });
          better = winner < 0 || marginal > best_exact;
          if (better) best_exact = marginal;
          if (trace) trace_score = ScoreValue(marginal);
          break;
        }
        case RuleKind::thiele_float: {
          double marginal = 0;
          for_each_approver(issue, c, ov, [&](int v) {
            marginal += f_float_[static_cast<std::size_t>(sats[static_cast<std::size_t>(v)] + 1)];
          });
          better = winner < 0 || (marginal > best_float && !approx_equal(marginal, best_float));
          if (better) best_float = marginal;
          if (trace) trace_score = ScoreValue(marginal);
          break;
        }
        case RuleKind::owa_vector_exact:
        case RuleKind::owa_vector_float: {
          candidate_vec(issue, c, sats, ov);
          const ScoreValue score = owa_score(*alpha_, cur_vec_);
          if (winner < 0) {
            better = true;
          } else if (kind_ == RuleKind::owa_vector_exact) {
            better = score.rational() > best_exact;
          } else {
            const double d = score.as_double();
            better = d > best_float && !approx_equal(d, best_float);
          }
          if (better) {
            if (kind_ == RuleKind::owa_vector_exact) {
              best_exact = score.rational();
            } else {
              best_float = score.as_double();
            }
          }
          if (trace) trace_score = score;
          break;
        }
        default: {  // comparator kinds
          candidate_vec(issue, c, sats, ov);
          better = winner < 0 || compare_sorted(kind_, cmp_x_, cur_vec_, best_vec_) ==
                                     std::strong_ordering::greater;
          if (better) best_vec_ = cur_vec_;
          break;
        }
      }
      if (trace) {
        if (kind_ == RuleKind::thiele_exact || kind_ == RuleKind::thiele_float) {
          candidate_vec(issue, c, sats, ov);
        }
        trace->evals.push_back(CandidateEval{c, std::move(trace_score), cur_vec_});
      }
      if (better) winner = c;
    }
    return winner;
  }

 private:
  template <typename Fn>
  void for_each_approver(int issue, int candidate, const BallotOverride& ov, Fn&& fn) const {
    const bool overridden = ov.active() && ov.issue == issue;
    for (int v : approvers_[static_cast<std::size_t>(issue)][static_cast<std::size_t>(candidate)]) {
      if (overridden && v == ov.voter) continue;
      fn(v);
    }
    if (overridden && ov.ballot && ballot_contains(*ov.ballot, candidate)) fn(ov.voter);
  }

  void bump_sats(int issue, int winner, std::vector<int>& sats, const BallotOverride& ov) const {
    for_each_approver(issue, winner, ov, [&](int v) { ++sats[static_cast<std::size_t>(v)]; });
  }

  // Sorted satisfaction vector if `candidate` wins `issue` given `sats`.
  void candidate_vec(int issue, int candidate, const std::vector<int>& sats,
                     const BallotOverride& ov) {
    cur_vec_ = sats;
    for_each_approver(issue, candidate, ov, [&](int v) { ++cur_vec_[static_cast<std::size_t>(v)]; });
    std::sort(cur_vec_.begin(), cur_vec_.end());
  }

  void finish_score(SolveResult& result) const {
    switch (kind_) {
      case RuleKind::thiele_exact: {
        Rational total = 0;
        std::vector<Rational> prefix(1, Rational(0));
        for (int s : result.sat) {
          while (static_cast<int>(prefix.size()) <= s) {
            prefix.push_back(prefix.back() + f_exact_[prefix.size()]);
          }
          total += prefix[static_cast<std::size_t>(s)];
        }
        result.score = ScoreValue(std::move(total));
        break;
      }
      case RuleKind::thiele_float: {
        double total = 0;
        std::vector<double> prefix(1, 0.0);
        for (int s : result.sat) {
          while (static_cast<int>(prefix.size()) <= s) {
            prefix.push_back(prefix.back() + f_float_[prefix.size()]);
          }
          total += prefix[static_cast<std::size_t>(s)];
        }
        result.score = ScoreValue(total);
        break;
      }
      case RuleKind::owa_vector_exact:
      case RuleKind::owa_vector_float:
        result.score = owa_score(*alpha_, result.sat);
        break;
      default:
        break;  // comparator rules have no scalar score
    }
  }

  const Election* e_;
  RuleKind kind_;
  int cmp_x_;
  std::vector<std::vector<std::vector<int>>> approvers_;  // [issue][candidate] -> voters
  std::vector<Rational> f_exact_;
  std::vector<double> f_float_;
  const OwaVector* alpha_ = nullptr;
  std::vector<int> cur_vec_;
  std::vector<int> best_vec_;
};

// Depth-first enumeration for optimization mode. Maintains satisfactions
// incrementally; Thiele rules additionally keep a running score and may prune.
template <bool Exact>
class OptThieleSearch {
  using Num = std::conditional_t<Exact, Rational, double>;

 public:
  OptThieleSearch(const Election& e, const ThieleFunction& f, bool prune)
      : e_(&e), prune_(prune) {
    const int k = e.issue_count();
    approvers_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      approvers_[static_cast<std::size_t>(i)].resize(
          static_cast<std::size_t>(e.issues[static_cast<std::size_t>(i)].candidate_count()));
    }
    for (int v = 0; v < e.voter_count; ++v) {
      for (int i = 0; i < k; ++i) {
        for (int c : e.approvals[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]) {
          approvers_[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].push_back(v);
        }
      }
    }
    f_.resize(static_cast<std::size_t>(k) + 2);
    for (int i = 1; i <= k + 1; ++i) {
      if constexpr (Exact) {
        f_[static_cast<std::size_t>(i)] = f.value_exact(i);
      } else {
        f_[static_cast<std::size_t>(i)] = f.value(i);
      }
    }
    sats_.assign(static_cast<std::size_t>(e.voter_count), 0);
    current_.assign(static_cast<std::size_t>(k), 0);
  }

  SolveResult run() {
    score_ = Num(0);
    have_best_ = false;
    dfs(0);
    SolveResult result;
    result.outcome = best_outcome_;
    result.score = ScoreValue(best_score_);
    result.sat = sorted_sat_vector(*e_, best_outcome_);
    return result;
  }

 private:
  void dfs(int issue) {
    if (issue == e_->issue_count()) {
      const bool better =
          !have_best_ || (Exact ? score_ > best_score_
                                : (score_ > best_score_ && !approx_equal(as_double(score_),
                                                                         as_double(best_score_))));
      if (better) {
        best_score_ = score_;
        best_outcome_ = current_;
        have_best_ = true;
      }
      return;
    }
    const IssueSpec& spec = e_->issues[static_cast<std::size_t>(issue)];
    for (int c : spec.tiebreak) {
      Num marginal = Num(0);
      for (int v : approvers_[static_cast<std::size_t>(issue)][static_cast<std::size_t>(c)]) {
        marginal += f_[static_cast<std::size_t>(sats_[static_cast<std::size_t>(v)] + 1)];
      }
      score_ += marginal;
      for (int v : approvers_[static_cast<std::size_t>(issue)][static_cast<std::size_t>(c)]) {
        ++sats_[static_cast<std::size_t>(v)];
      }
      current_[static_cast<std::size_t>(issue)] = c;
      bool explore = true;
      if (prune_ && have_best_ && issue + 1 < e_->issue_count()) {
        const Num limit = score_ + upper_bound(issue + 1);
        if constexpr (Exact) {
          explore = limit > best_score_;
        } else {
          explore = as_double(limit) > as_double(best_score_) &&
                    !approx_equal(as_double(limit), as_double(best_score_));
        }
      }
      if (explore) dfs(issue + 1);
      for (int v : approvers_[static_cast<std::size_t>(issue)][static_cast<std::size_t>(c)]) {
        --sats_[static_cast<std::size_t>(v)];
      }
      score_ -= marginal;
    }
  }

  // Admissible: each undecided issue contributes at most the best marginal
  // available at the current satisfactions.
  Num upper_bound(int from) const {
    Num total = Num(0);
    for (int i = from; i < e_->issue_count(); ++i) {
      Num best = Num(0);
      const auto& per_candidate = approvers_[static_cast<std::size_t>(i)];
      for (const auto& voters : per_candidate) {
        Num marginal = Num(0);
        for (int v : voters) {
          marginal += f_[static_cast<std::size_t>(sats_[static_cast<std::size_t>(v)] + 1)];
        }
        if (marginal > best) best = marginal;
      }
      total += best;
    }
    return total;
  }

  static double as_double(const Num& x) {
    if constexpr (Exact) {
      return static_cast<double>(x);
    } else {
      return x;
    }
  }

  const Election* e_;
  bool prune_;
  std::vector<std::vector<std::vector<int>>> approvers_;
  std::vector<Num> f_;
  std::vector<int> sats_;
  Outcome current_;
  Num score_{};
  Num best_score_{};
  Outcome best_outcome_;
  bool have_best_ = false;
};

// Exhaustive enumeration for comparator and raw-OWA rules: incremental
// satisfactions, leaf evaluation on the sorted vector.
inline SolveResult opt_enumerate(const Election& e, const RuleSpec& rule) {
  const RuleKind kind = classify_rule(rule);
  const int k = e.issue_count();
  std::vector<std::vector<std::vector<int>>> approvers(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    approvers[static_cast<std::size_t>(i)].resize(
        static_cast<std::size_t>(e.issues[static_cast<std::size_t>(i)].candidate_count()));
  }
  for (int v = 0; v < e.voter_count; ++v) {
    for (int i = 0; i < k; ++i) {
      for (int c : e.approvals[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]) {
        approvers[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].push_back(v);
      }
    }
  }
  std::vector<int> sats(static_cast<std::size_t>(e.voter_count), 0);
  Outcome current(static_cast<std::size_t>(k), 0);
  Outcome best_outcome;
  SortedSatVector best_vec;
  std::optional<Rational> best_exact;
  std::optional<double> best_float;
  bool have_best = false;
  const int cmp_x = rule.is_comparator() ? rule.comparator().x : 0;

  SortedSatVector scratch;
  const auto leaf = [&]() {
    scratch = sats;
    std::sort(scratch.begin(), scratch.end());
    bool better = false;
    if (is_comparator_kind(kind)) {
      better = !have_best ||
               compare_sorted(kind, cmp_x, scratch, best_vec) == std::strong_ordering::greater;
    } else {
      const ScoreValue score = owa_score(rule.owa(), scratch);
      if (kind == RuleKind::owa_vector_exact) {
        better = !have_best || score.rational() > *best_exact;
        if (better) best_exact = score.rational();
      } else {
        const double d = score.as_double();
        better = !have_best || (d > *best_float && !approx_equal(d, *best_float));
        if (better) best_float = d;
      }
    }
    if (better) {
      best_outcome = current;
      best_vec = scratch;
      have_best = true;
    }
  };

  // Iterative DFS in tie-break order via an explicit odometer of ranks.
  const std::function<void(int)> dfs = [&](int issue) {
    if (issue == k) {
      leaf();
      return;
    }
    for (int c : e.issues[static_cast<std::size_t>(issue)].tiebreak) {
      for (int v : approvers[static_cast<std::size_t>(issue)][static_cast<std::size_t>(c)]) {
        ++sats[static_cast<std::size_t>(v)];
      }
      current[static_cast<std::size_t>(issue)] = c;
      dfs(issue + 1);
      for (int v : approvers[static_cast<std::size_t>(issue)][static_cast<std::size_t>(c)]) {
        --sats[static_cast<std::size_t>(v)];
      }
    }
  };
  dfs(0);

  SolveResult result;
  result.outcome = best_outcome;
  result.sat = best_vec;
  if (best_exact) result.score = ScoreValue(*best_exact);
  if (best_float) result.score = ScoreValue(*best_float);
  return result;
}

}  // namespace detail

inline SolveResult solve_optimization(const Election& e, const RuleSpec& rule,
                                      const SolverBudget& budget = {}) {
  require_valid(e);
  detail::check_budget(e, budget);
  if (rule.is_thiele()) {
    if (rule.thiele().exact()) {
      detail::OptThieleSearch<true> search(e, rule.thiele(), budget.enable_pruning);
      return search.run();
    }
    detail::OptThieleSearch<false> search(e, rule.thiele(), budget.enable_pruning);
    return search.run();
  }
  return detail::opt_enumerate(e, rule);
}

inline SolveResult solve_sequential(const Election& e, const RuleSpec& rule) {
  require_valid(e);
  detail::SeqEngine engine(e, rule);
  return engine.solve(/*with_trace=*/true).result;
}

inline SolveResult solve(const Election& e, const RuleSpec& rule, const SolverBudget& budget = {}) {
  return rule.mode == RuleMode::optimization ? solve_optimization(e, rule, budget)
                                             : solve_sequential(e, rule);
}

inline bool winner_of_issue(const Election& e, const RuleSpec& rule, int issue, int candidate,
                            const SolverBudget& budget = {}) {
  require_valid(e);
  if (issue < 0 || issue >= e.issue_count()) throw ValidationError("issue index out of range");
  if (candidate < 0 || candidate >= e.issues[static_cast<std::size_t>(issue)].candidate_count()) {
    throw ValidationError("candidate index out of range");
  }
  return solve(e, rule, budget).outcome[static_cast<std::size_t>(issue)] == candidate;
}

// Test oracle: plain enumeration over the raw index odometer, scoring every
// outcome from scratch through the public scoring entry points and breaking
// ties with compare_outcomes_tiebreak. Capped at 2^20 outcomes.
inline SolveResult brute_force_oracle(const Election& e, const RuleSpec& rule) {
  require_valid(e);
  const SolverBudget cap{std::uint64_t(1) << 20, false};
  detail::check_budget(e, cap);
  const detail::RuleKind kind = detail::classify_rule(rule);
  const int k = e.issue_count();
  Outcome current(static_cast<std::size_t>(k), 0);
  std::optional<Outcome> best;
  SortedSatVector best_vec;
  std::optional<ScoreValue> best_score;

  const auto evaluate = [&]() {
    const SortedSatVector vec = sorted_sat_vector(e, current);
    std::optional<ScoreValue> score;
    if (rule.is_thiele()) {
      score = thiele_score(rule.thiele(), e, current);
    } else if (rule.is_owa_vector()) {
      score = owa_score(rule.owa(), vec);
    }
    std::strong_ordering cmp = std::strong_ordering::equal;
    if (!best) {
      cmp = std::strong_ordering::greater;
    } else if (detail::is_comparator_kind(kind)) {
      cmp = detail::compare_sorted(kind, rule.is_comparator() ? rule.comparator().x : 0, vec,
                                   best_vec);
    } else {
      cmp = compare_scores(*score, *best_score);
    }
    const bool take =
        cmp == std::strong_ordering::greater ||
        (cmp == std::strong_ordering::equal && best &&
         compare_outcomes_tiebreak(current, *best, e) == std::strong_ordering::less);
    if (take) {
      best = current;
      best_vec = vec;
      best_score = score;
    }
  };

  while (true) {
    evaluate();
    int i = k - 1;
    while (i >= 0) {
      if (++current[static_cast<std::size_t>(i)] <
          e.issues[static_cast<std::size_t>(i)].candidate_count()) {
        break;
      }
      current[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }

  SolveResult result;
  result.outcome = *best;
  result.sat = best_vec;
  result.score = best_score;
  return result;
}

}  // namespace multivote
