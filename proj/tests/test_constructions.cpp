#include <catch_amalgamated.hpp>

#include "multivote/constructions.hpp"

using namespace multivote;

namespace {

void check_fixture(const Fixture& fx) {
  INFO("fixture " << fx.name);
  REQUIRE(validate(fx.election).empty());
  REQUIRE(solve(fx.election, fx.rule).outcome == fx.expected_truthful);
  if (!fx.deviation) return;
  auto finding = is_free_ride(fx.election, fx.rule, *fx.deviation);
  REQUIRE(finding);
  if (fx.expected_deviated) REQUIRE(finding->deviated_outcome == *fx.expected_deviated);
  if (fx.expected_class) REQUIRE(finding->cls == *fx.expected_class);
  if (fx.expected_delta) REQUIRE(finding->delta_sat == *fx.expected_delta);

  // The per-issue search rediscovers a deviation of the expected class.
  if (fx.deviation->replacements.size() == 1) {
    const int issue = fx.deviation->replacements.begin()->first;
    bool seen = false;
    for (const FreeRideFinding& f :
         find_free_rides(fx.election, fx.rule, fx.deviation->voter, issue)) {
      seen = seen || (!fx.expected_class || f.cls == *fx.expected_class);
    }
    REQUIRE(seen);
  }
}

}  // namespace

TEST_CASE("every named fixture reproduces its recorded run") {
  for (const std::string& name : fixture_names()) {
    Fixture fx = make_fixture(name);
    REQUIRE(fx.name == name);
    check_fixture(fx);
  }
  REQUIRE_THROWS_AS(make_fixture("no-such-fixture"), ParseError);
}

TEST_CASE("running example pins the three classic optima") {
  Fixture fx = running_example();
  REQUIRE(fx.election.voter_count == 100);
  REQUIRE(solve(fx.election, parse_rule("thiele:util@opt")).outcome == Outcome{0, 0, 0, 0});
  REQUIRE(solve(fx.election, parse_rule("owa:leximin@opt")).outcome == Outcome{0, 0, 1, 2});
  REQUIRE(solve(fx.election, parse_rule("thiele:pav@opt")).outcome == Outcome{0, 0, 0, 1});
}

TEST_CASE("egalitarian free-ride example matches the worked trace") {
  Fixture fx = egal_free_ride_example();
  check_fixture(fx);
  REQUIRE(fx.expected_class == FreeRideClass::successful);
  REQUIRE(fx.expected_delta == 1);
}

TEST_CASE("sequential Thiele manipulation adapts to the function's first drop") {
  SECTION("PAV: k = 2, so three issues") {
    Fixture fx = seq_thiele_manipulation(ThieleFunction::pav());
    REQUIRE(fx.election.issue_count() == 3);
    REQUIRE(fx.expected_truthful == Outcome{0, 0, 0});
    REQUIRE(*fx.expected_deviated == Outcome{0, 0, 1});
    check_fixture(fx);
  }
  SECTION("power decay x = 0.5 also drops at k = 2") {
    Fixture fx = seq_thiele_manipulation(ThieleFunction::power_decay(0.5));
    REQUIRE(fx.election.issue_count() == 3);
    check_fixture(fx);
  }
  SECTION("utilitarian never drops, so no construction exists") {
    REQUIRE_THROWS_AS(seq_thiele_manipulation(ThieleFunction::utilitarian()),
                      ValidationError);
    REQUIRE_THROWS_AS(seq_thiele_manipulation(ThieleFunction::power_decay(0.0)),
                      ValidationError);
  }
}

TEST_CASE("optimization Thiele manipulation free-rides on the last safe issue") {
  Fixture fx = opt_thiele_manipulation(ThieleFunction::pav());
  REQUIRE(fx.rule.mode == RuleMode::optimization);
  REQUIRE(fx.deviation->replacements.count(1) == 1);  // issue k-1 with k = 2
  check_fixture(fx);
  REQUIRE_THROWS_AS(opt_thiele_manipulation(ThieleFunction::utilitarian()), ValidationError);
}

TEST_CASE("OWA manipulations need alpha_1 > alpha_n") {
  for (int k : {3, 4, 5}) {
    check_fixture(owa_manipulation(OwaComparator{ComparatorKind::egalitarian, 0}, k));
    check_fixture(owa_manipulation(OwaComparator{ComparatorKind::leximin, 0}, k));
    check_fixture(owa_manipulation(OwaComparator{ComparatorKind::hybrid, k - 2}, k));
    check_fixture(seq_owa_manipulation(OwaComparator{ComparatorKind::egalitarian, 0}, k));
  }
  REQUIRE_THROWS_AS(owa_manipulation(OwaComparator{ComparatorKind::hybrid, 0}, 4),
                    ValidationError);
  REQUIRE_THROWS_AS(owa_manipulation(OwaComparator{ComparatorKind::egalitarian, 0}, 2),
                    ValidationError);
}

TEST_CASE("harmful sequential Thiele fixture: the ride backfires") {
  Fixture fx = seq_thiele_harmful(ThieleFunction::pav());
  REQUIRE(fx.election.issue_count() == 4);  // i = 1 for PAV
  REQUIRE(fx.election.voter_count == 9);
  REQUIRE(fx.expected_truthful == Outcome{0, 0, 1, 1});
  REQUIRE(*fx.expected_deviated == Outcome{0, 1, 0, 0});
  REQUIRE(fx.expected_delta == -1);
  check_fixture(fx);
  REQUIRE_THROWS_AS(seq_thiele_harmful(ThieleFunction::utilitarian()), ValidationError);

  SECTION("another strictly decreasing family drives the same gadget") {
    Fixture later = seq_thiele_harmful(ThieleFunction::lex_simulated(4, 9));
    REQUIRE(later.election.issue_count() == 4);  // f first drops at i = 1
    check_fixture(later);
  }
}

TEST_CASE("harmful sequential OWA fixture prefers high-index candidates in ties") {
  Fixture fx = seq_owa_harmful(8);
  REQUIRE(fx.election.voter_count == 8);
  REQUIRE(fx.election.issue_count() == 4);
  for (const IssueSpec& spec : fx.election.issues) {
    REQUIRE(spec.tiebreak.front() == spec.candidate_count() - 1);
  }
  check_fixture(fx);
  REQUIRE(fx.expected_delta == -1);

  SECTION("the same election under the leximin comparator") {
    check_fixture(seq_owa_harmful_leximin(8));
  }
  SECTION("larger populations keep the harmful ride") {
    for (int n : {9, 10}) {
      Fixture big = seq_owa_harmful(n);
      auto finding = is_free_ride(big.election, big.rule, *big.deviation);
      REQUIRE(finding);
      REQUIRE(finding->cls == FreeRideClass::harmful);
      check_fixture(seq_owa_harmful_leximin(n));
    }
  }
  SECTION("preconditions") {
    REQUIRE_THROWS_AS(seq_owa_harmful(7), ValidationError);
    std::vector<Rational> flat(8, Rational(1));
    REQUIRE_THROWS_AS(seq_owa_harmful(8, OwaVector::from_rationals(flat)), ValidationError);
    std::vector<Rational> rising = {Rational(1), Rational(1), Rational(1), Rational(1),
                                    Rational(1), Rational(1), Rational(1), Rational(2)};
    REQUIRE_THROWS_AS(seq_owa_harmful(8, OwaVector::from_rationals(rising)), ValidationError);
    std::vector<Rational> short_alpha(5, Rational(1));
    REQUIRE_THROWS_AS(seq_owa_harmful(8, OwaVector::from_rationals(short_alpha)),
                      ValidationError);
  }
  SECTION("a strictly decreasing custom alpha works too") {
    std::vector<Rational> alpha;
    for (int i = 0; i < 8; ++i) alpha.push_back(Rational(1, 1 << i));
    Fixture fx2 = seq_owa_harmful(8, OwaVector::from_rationals(alpha));
    auto finding = is_free_ride(fx2.election, fx2.rule, *fx2.deviation);
    REQUIRE(finding);
    REQUIRE(finding->cls == FreeRideClass::harmful);
  }
}

TEST_CASE("harmful sequential egalitarian fixture: satisfaction drops 3 to 2") {
  Fixture fx = seq_egal_harmful();
  REQUIRE(fx.expected_truthful == Outcome{0, 0, 0, 1, 1});
  REQUIRE(*fx.expected_deviated == Outcome{0, 0, 1, 0, 0});
  const int before = satisfaction(fx.election, 0, fx.expected_truthful);
  const int after = satisfaction(fx.election, 0, *fx.expected_deviated);
  REQUIRE(before == 3);
  REQUIRE(after == 2);
  check_fixture(fx);
}
