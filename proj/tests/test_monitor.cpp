#include <catch2/catch_amalgamated.hpp>

#include "bmda/monitor.hpp"

using namespace bmda;

namespace {

SpoilEvent spoil(std::int64_t ts, const std::string& loc) { return {ts, loc, "m1"}; }

}  // namespace

TEST_CASE("empty stream raises no alarms") {
  SpoilMonitor m(0.01);
  const auto s = m.state();
  CHECK_FALSE(s.global_alarm);
  CHECK(s.location_alarms.empty());
  CHECK(m.total_spoils() == 0);
}

TEST_CASE("global alarm boundary at the Poisson quantile") {
  // 200,000 cast at 1% expected: threshold 2074, alarm only above it.
  SpoilMonitor m(0.01);
  m.ingest_cast({0, "loc1", 200000});
  CHECK(m.global_threshold() == 2074);
  AlarmState s;
  for (int i = 0; i < 2074; ++i) s = m.ingest(spoil(i + 1, "loc1"));
  CHECK_FALSE(s.global_alarm);  // exactly at the threshold: still inside the band
  s = m.ingest(spoil(3000, "loc1"));
  CHECK(s.global_alarm);  // 2075 spoils
  CHECK(m.total_spoils() == 2075);
}

TEST_CASE("per-location thresholds use each location's cast feed") {
  SpoilMonitor m(0.01);
  m.ingest_cast({0, "a", 200000});
  m.ingest_cast({0, "b", 100});
  // location b: mu = 1, q95(1) = 3
  CHECK(m.location_threshold("b") == 3);
  AlarmState s;
  for (int i = 0; i < 4; ++i) s = m.ingest(spoil(10 + i, "b"));
  CHECK(s.location_alarms == std::vector<std::string>{"b"});
  CHECK_FALSE(s.global_alarm);  // 4 spoils vs global threshold for 200,100 cast
}

TEST_CASE("location rate overrides") {
  SpoilMonitor m(0.01);
  m.set_location_rate("hot", 0.05);
  m.ingest_cast({0, "hot", 1000});
  // mu = 50 under the override instead of 10
  CHECK(m.location_threshold("hot") == poisson_quantile(0.95, 50.0));
  CHECK_THROWS_AS(m.set_location_rate("x", 0.0), invalid_parameter);
}

TEST_CASE("out-of-order timestamps are rejected") {
  SpoilMonitor m(0.01);
  m.ingest(spoil(100, "a"));
  CHECK_THROWS_AS(m.ingest(spoil(99, "a")), out_of_order_event);
  CHECK_THROWS_AS(m.ingest_cast({50, "a", 10}), out_of_order_event);
  // equal timestamps are fine
  CHECK_NOTHROW(m.ingest(spoil(100, "a")));
}

TEST_CASE("cast totals are cumulative and cannot decrease") {
  SpoilMonitor m(0.01);
  m.ingest_cast({0, "a", 100});
  m.ingest_cast({1, "a", 250});
  CHECK(m.total_cast() == 250);
  CHECK_THROWS_AS(m.ingest_cast({2, "a", 200}), data_error);
}

TEST_CASE("alarm state is a pure function of the ingested multiset") {
  // Same events in two different valid interleavings across locations.
  SpoilMonitor m1(0.02), m2(0.02);
  m1.ingest_cast({0, "a", 500});
  m1.ingest_cast({0, "b", 500});
  m2.ingest_cast({0, "b", 500});
  m2.ingest_cast({0, "a", 500});
  for (int i = 0; i < 30; ++i) {
    m1.ingest(spoil(10, "a"));
    m1.ingest(spoil(10, "b"));
  }
  for (int i = 0; i < 30; ++i) m2.ingest(spoil(10, "b"));
  for (int i = 0; i < 30; ++i) m2.ingest(spoil(10, "a"));
  const auto s1 = m1.state();
  const auto s2 = m2.state();
  CHECK(s1.global_alarm == s2.global_alarm);
  CHECK(s1.location_alarms == s2.location_alarms);
  CHECK(m1.total_spoils() == m2.total_spoils());
}

TEST_CASE("zero cast means any spoil alarms") {
  SpoilMonitor m(0.01);
  CHECK(m.global_threshold() == 0);
  const auto s = m.ingest(spoil(1, "a"));
  CHECK(s.global_alarm);
}
