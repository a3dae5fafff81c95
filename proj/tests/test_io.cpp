#include <catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "multivote/io.hpp"

using namespace multivote;

namespace {

Election two_issue_election() {
  return make_election(
      {IssueSpec{{"a", "b", "c"}, {2, 0, 1}}, IssueSpec{{"x", "y"}, {}}},
      {{{0, 1}, {1}}, {{2}, {}}});
}

}  // namespace

TEST_CASE("election JSON uses a fixed key order and omits identity tie-breaks") {
  const Election e = make_election({IssueSpec{{"a", "b"}, {}}}, {{{0}}});
  REQUIRE(election_to_json(e).dump() ==
          R"({"issues":[{"candidates":["a","b"]}],"voters":1,"approvals":[[[0]]]})");
}

TEST_CASE("election JSON round-trips, including explicit tie-breaks") {
  const Election e = two_issue_election();
  const Json j = election_to_json(e);
  REQUIRE(j["issues"][0]["tiebreak"] == Json::array({2, 0, 1}));
  REQUIRE_FALSE(j["issues"][1].contains("tiebreak"));
  const Election back = election_from_json(j);
  REQUIRE(back == e);
  REQUIRE(parse_election(j.dump()) == e);
}

TEST_CASE("parsing normalizes ballots like make_election does") {
  const Election e = parse_election(
      R"({"issues":[{"candidates":["a","b"]}],"voters":1,"approvals":[[[1,0,1]]]})");
  REQUIRE(e.approvals[0][0] == std::vector<int>{0, 1});
}

TEST_CASE("election parse errors") {
  REQUIRE_THROWS_AS(parse_election("not json"), ParseError);
  REQUIRE_THROWS_AS(parse_election("[1,2]"), ParseError);
  REQUIRE_THROWS_AS(parse_election(R"({"voters":1,"approvals":[[[0]]]})"), ParseError);
  REQUIRE_THROWS_AS(parse_election(R"({"issues":[{"candidates":["a"]}],"approvals":[[[0]]]})"),
                    ParseError);
  REQUIRE_THROWS_AS(parse_election(R"({"issues":[{"candidates":["a"]}],"voters":1})"),
                    ParseError);
  REQUIRE_THROWS_AS(
      parse_election(R"({"issues":[{"candidates":["a"]}],"voters":"1","approvals":[[[0]]]})"),
      ParseError);
  REQUIRE_THROWS_AS(
      parse_election(R"({"issues":[{"candidates":[1]}],"voters":1,"approvals":[[[0]]]})"),
      ParseError);
  REQUIRE_THROWS_AS(
      parse_election(R"({"issues":[{"candidates":["a"]}],"voters":2,"approvals":[[[0]]]})"),
      ParseError);
  REQUIRE_THROWS_AS(
      parse_election(R"({"issues":[{"candidates":["a"]}],"voters":1,"approvals":[[["a"]]]})"),
      ParseError);
  // Structurally valid JSON with out-of-range indices fails validation instead.
  REQUIRE_THROWS_AS(
      parse_election(R"({"issues":[{"candidates":["a"]}],"voters":1,"approvals":[[[3]]]})"),
      ValidationError);
  REQUIRE_THROWS_AS(
      parse_election(
          R"({"issues":[{"candidates":["a","b"],"tiebreak":[0,0]}],"voters":1,"approvals":[[[0]]]})"),
      ValidationError);
}

TEST_CASE("deviation JSON round-trips") {
  Deviation dev;
  dev.voter = 3;
  dev.replacements[1] = {0, 2};
  dev.replacements[0] = {};
  const Json j = deviation_to_json(dev);
  REQUIRE(j.dump() ==
          R"({"voter":3,"replacements":[{"issue":0,"ballot":[]},{"issue":1,"ballot":[0,2]}]})");
  const Deviation back = deviation_from_json(j);
  REQUIRE(back.voter == dev.voter);
  REQUIRE(back.replacements == dev.replacements);
  REQUIRE_THROWS_AS(deviation_from_json(Json::parse(R"({"voter":0})")), ParseError);
  REQUIRE_THROWS_AS(deviation_from_json(Json::parse(R"({"replacements":[]})")), ParseError);
  REQUIRE_THROWS_AS(
      deviation_from_json(Json::parse(R"({"voter":0,"replacements":[{"issue":0}]})")),
      ParseError);
}

TEST_CASE("solve results serialize winners, sat vector and exact scores") {
  const Fixture fx = running_example();
  const RuleSpec rule = parse_rule("thiele:pav@opt");
  const Json j = solve_result_to_json(fx.election, rule, solve(fx.election, rule));
  REQUIRE(j["rule"] == "thiele:pav@opt");
  REQUIRE(j["outcome"] == Json::array({0, 0, 0, 1}));
  REQUIRE(j["winners"] == Json::array({"a", "a", "a", "b"}));
  REQUIRE(j["sat_vector"].size() == 100);
  REQUIRE(j["score"] == "154");

  // Comparator-only rules carry no score.
  const RuleSpec egal = parse_rule("owa:egal@seq");
  const Json k = solve_result_to_json(fx.election, egal, solve(fx.election, egal));
  REQUIRE_FALSE(k.contains("score"));
}

TEST_CASE("findings serialize their classification") {
  const Fixture fx = egal_free_ride_example();
  const auto finding =
      is_free_ride(fx.election, fx.rule, *fx.deviation);
  REQUIRE(finding.has_value());
  const Json j = finding_to_json(*finding);
  REQUIRE(j["voter"] == 1);
  REQUIRE(j["issues"] == Json::array({0}));
  REQUIRE(j["deviation"]["replacements"][0]["issue"] == 0);
  REQUIRE(j["truthful_outcome"] == Json::array({0, 0}));
  REQUIRE(j["deviated_outcome"] == Json::array({0, 1}));
  REQUIRE(j["delta_sat"] == 1);
  REQUIRE(j["class"] == "successful");
  REQUIRE(j["generalized"] == false);
}

TEST_CASE("audit reports list pairs before the rule") {
  const Fixture fx = egal_free_ride_example();
  const Json j = audit_report_to_json(audit_election(fx.election, fx.rule), fx.rule);
  const std::string text = j.dump();
  REQUIRE(j["rule"] == "owa:egal@opt");
  REQUIRE(text.find("\"pairs\"") < text.find("\"rule\""));
  for (const Json& pair : j["pairs"]) {
    REQUIRE(pair.contains("voter"));
    REQUIRE(pair.contains("issue"));
    REQUIRE(pair["successful"].is_boolean());
    REQUIRE(pair["harmful"].is_boolean());
  }
}

TEST_CASE("fixtures serialize with their expectations") {
  for (const std::string& name : fixture_names()) {
    const Fixture fx = make_fixture(name);
    const Json j = fixture_to_json(fx);
    REQUIRE(j["name"] == name);
    REQUIRE(j["rule"] == format_rule(fx.rule));
    REQUIRE(election_from_json(j["election"]) == fx.election);
    REQUIRE(j["expected_truthful"].is_array());
    REQUIRE(j.contains("deviation") == fx.deviation.has_value());
  }
  const Json j = fixture_to_json(make_fixture("egal-freeride"));
  REQUIRE(j["expected_class"] == "successful");
  REQUIRE(j["expected_delta"] == 1);
}
