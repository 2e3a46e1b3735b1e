#include <catch2/catch_amalgamated.hpp>

#include "bmda/behavior.hpp"

using namespace bmda;

TEST_CASE("fit_model: degenerate precinct history gives probability 1") {
  std::vector<HistoricalBallotRecord> h{{"p1", "gov", "A", 100}};
  const auto model = fit_model(h);
  CHECK(model.precincts.at("p1").preferences.at("gov").probs.at("A") == 1.0);
  CHECK(model.default_timing_used);
  CHECK(model.precincts.at("p1").speed_minutes == default_speed_histogram());
}

TEST_CASE("fit_model: two precincts with mirrored splits") {
  std::vector<HistoricalBallotRecord> h{
      {"p1", "gov", "A", 60}, {"p1", "gov", "B", 40}, {"p2", "gov", "A", 40}, {"p2", "gov", "B", 60}};
  const auto model = fit_model(h);
  CHECK(model.precincts.at("p1").preferences.at("gov").probs.at("A") == Catch::Approx(0.6));
  CHECK(model.precincts.at("p1").preferences.at("gov").probs.at("B") == Catch::Approx(0.4));
  CHECK(model.precincts.at("p2").preferences.at("gov").probs.at("A") == Catch::Approx(0.4));
  CHECK(model.precincts.at("p2").preferences.at("gov").probs.at("B") == Catch::Approx(0.6));
}

TEST_CASE("fit_model: timing data is binned to minutes; fallback flagged") {
  std::vector<HistoricalBallotRecord> h{{"p1", "gov", "A", 10}};
  std::vector<TimingRecord> t{{"m1", 0, 110},    // 2 minutes (ceil)
                              {"m1", 0, 120},    // 2 minutes
                              {"m2", 0, 240},    // 4 minutes
                              {"m2", 0, 241}};   // 5 minutes
  const auto model = fit_model(h, t);
  CHECK_FALSE(model.default_timing_used);
  const auto& hist = model.precincts.at("p1").speed_minutes;
  CHECK(hist.at(2) == Catch::Approx(0.5));
  CHECK(hist.at(4) == Catch::Approx(0.25));
  CHECK(hist.at(5) == Catch::Approx(0.25));
}

TEST_CASE("fit_model errors") {
  CHECK_THROWS_AS(fit_model({}), data_error);
  std::vector<HistoricalBallotRecord> zero{{"p1", "gov", "A", 0}};
  CHECK_THROWS_AS(fit_model(zero), data_error);  // precinct with no ballots
  std::vector<HistoricalBallotRecord> neg{{"p1", "gov", "A", -5}};
  CHECK_THROWS_AS(fit_model(neg), data_error);
  std::vector<HistoricalBallotRecord> ok{{"p1", "gov", "A", 5}};
  std::vector<TimingRecord> bad_t{{"m1", 100, 50}};
  CHECK_THROWS_AS(fit_model(ok, bad_t), data_error);
}

TEST_CASE("history CSV parsing reports line numbers") {
  const std::string good = "precinct,contest,choice,count\np1,gov,A,60\np1,gov,B,40\n";
  const auto rows = parse_history_csv(good);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].precinct == "p1");
  CHECK(rows[1].count == 40);

  try {
    parse_history_csv("precinct,contest,choice,count\np1,gov,A\n");
    FAIL("expected data_error");
  } catch (const data_error& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_history_csv("precinct,contest,choice,count\np1,gov,A,x\n"), data_error);
}

TEST_CASE("timing CSV parsing") {
  const std::string good =
      "machine,session_start,session_end\n"
      "m1,2020-11-03T08:00:00,2020-11-03T08:04:30\n";
  const auto rows = parse_timing_csv(good);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].session_end - rows[0].session_start == 270);
  CHECK_THROWS_AS(parse_timing_csv("machine,session_start,session_end\nm1,notatime,2020-11-03T08:00:00\n"),
                  data_error);
}

TEST_CASE("canonical serialization is construction-order independent") {
  VoterBehaviorModel a, b;
  PrecinctBehavior pb;
  pb.preferences["gov"] = Categorical{{{"A", 0.6}, {"B", 0.4}}};
  pb.speed_minutes = default_speed_histogram();
  PrecinctBehavior pb2;
  pb2.preferences["gov"] = Categorical{{{"B", 0.4}, {"A", 0.6}}};  // reversed insert order
  pb2.speed_minutes = default_speed_histogram();
  a.precincts["p1"] = pb;
  a.precincts["p2"] = pb;
  b.precincts["p2"] = pb;
  b.precincts["p1"] = pb2;
  CHECK(a.canonical_json() == b.canonical_json());
  CHECK(a.digest() == b.digest());

  // any change changes the digest
  b.precincts["p1"].preferences["gov"].probs["A"] = 0.61;
  b.precincts["p1"].preferences["gov"].probs["B"] = 0.39;
  CHECK(a.digest() != b.digest());
}

TEST_CASE("model JSON round trip") {
  std::vector<HistoricalBallotRecord> h{
      {"p1", "gov", "A", 60}, {"p1", "gov", "B", 40}, {"p2", "gov", "A", 10}, {"p2", "gov", "B", 30}};
  const auto model = fit_model(h);
  const auto round = VoterBehaviorModel::from_json(model.to_json());
  CHECK(round.canonical_json() == model.canonical_json());
}

TEST_CASE("speed_at_least integrates the minute histogram") {
  PrecinctBehavior b;
  b.speed_minutes = {{2, 0.5}, {5, 0.3}, {9, 0.2}};
  CHECK(b.speed_at_least(0) == Catch::Approx(1.0));
  CHECK(b.speed_at_least(121) == Catch::Approx(0.5));   // only the 5- and 9-minute bins
  CHECK(b.speed_at_least(300) == Catch::Approx(0.5));   // 5 minutes == 300s counts
  CHECK(b.speed_at_least(301) == Catch::Approx(0.2));
  CHECK(b.speed_at_least(541) == Catch::Approx(0.0));
}
