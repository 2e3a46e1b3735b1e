#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "bmda/policy.hpp"
#include "bmda/report.hpp"
#include "helpers.hpp"

using namespace bmda;

namespace {

std::vector<int> all_slots(const ElectionConfig& config) {
  std::vector<int> slots(config.schedule.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<int>(i);
  return slots;
}

}  // namespace

TEST_CASE("static policy never amends") {
  const auto config = test::two_precinct_config();
  const auto model = config.behavior_model();
  AlarmState alarms;
  alarms.location_alarms = {"north"};
  std::set<std::pair<std::string, int>> booked;
  const auto slots = all_slots(config);
  const auto amendment =
      apply_policy(StaticPolicy{50}, alarms, config, model, slots, booked, 100, 1);
  CHECK(amendment.entries.empty());
  CHECK(amendment.reserve_used == 0);
}

TEST_CASE("no alarms, no amendment") {
  const auto config = test::two_precinct_config();
  const auto model = config.behavior_model();
  std::set<std::pair<std::string, int>> booked;
  const auto slots = all_slots(config);
  const auto amendment = apply_policy(AdaptivePolicy{50, {}, 10, 5}, AlarmState{}, config, model,
                                      slots, booked, 10, 2);
  CHECK(amendment.entries.empty());
}

TEST_CASE("adaptive policy sends per_alarm auditors to the alarmed location") {
  const auto config = test::two_precinct_config();
  const auto model = config.behavior_model();
  AlarmState alarms;
  alarms.location_alarms = {"south"};
  std::set<std::pair<std::string, int>> booked;
  const std::vector<int> remaining{40, 41, 42, 43, 44, 45, 46, 47};  // future slots only
  const auto amendment = apply_policy(AdaptivePolicy{50, {}, 10, 5}, alarms, config, model,
                                      remaining, booked, 10, 3);
  REQUIRE(amendment.entries.size() == 5);
  CHECK(amendment.reserve_used == 5);
  CHECK_FALSE(amendment.capped);
  std::set<std::pair<std::string, int>> seen;
  for (const auto& e : amendment.entries) {
    CHECK(e.precinct == "p2");                     // only precinct voting at "south"
    CHECK(e.machine_id.front() == 's');            // machines at the alarmed location
    CHECK(std::find(remaining.begin(), remaining.end(), e.slot_index) != remaining.end());
    CHECK(seen.insert({e.machine_id, e.slot_index}).second);  // no double-booking
    CHECK(e.selections.count("county") == 1);
    CHECK(e.selections.count("local") == 1);
  }
  // the booked set was extended in place
  CHECK(booked.size() == 5);

  // deterministic given the seed
  std::set<std::pair<std::string, int>> booked2;
  const auto again = apply_policy(AdaptivePolicy{50, {}, 10, 5}, alarms, config, model, remaining,
                                  booked2, 10, 3);
  REQUIRE(again.entries.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(again.entries[i].machine_id == amendment.entries[i].machine_id);
    CHECK(again.entries[i].slot_index == amendment.entries[i].slot_index);
    CHECK(again.entries[i].selections == amendment.entries[i].selections);
  }
}

TEST_CASE("amendments cap at the remaining reserve") {
  const auto config = test::two_precinct_config();
  const auto model = config.behavior_model();
  AlarmState alarms;
  alarms.location_alarms = {"north", "south"};
  std::set<std::pair<std::string, int>> booked;
  const auto slots = all_slots(config);
  const auto amendment = apply_policy(AdaptivePolicy{50, {}, 3, 10}, alarms, config, model, slots,
                                      booked, 3, 4);
  CHECK(amendment.entries.size() == 3);
  CHECK(amendment.reserve_used == 3);
  CHECK(amendment.capped);
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(validate(OfficialPolicy{StaticPolicy{-1}}), config_error);
  CHECK_THROWS_AS(validate(OfficialPolicy{AdaptivePolicy{10, {}, -1, 5}}), config_error);
  CHECK_NOTHROW(validate(OfficialPolicy{AdaptivePolicy{10, {}, 5, 5}}));
}

TEST_CASE("emergency_state") {
  TrialOutcome clean;
  CHECK_FALSE(emergency_state(clean).triggered);
  CHECK(emergency_state(clean).causes.empty());

  TrialOutcome caught;
  caught.audit_catches = 1;
  caught.catch_events.push_back({"audit_mismatch", "m3", 2, 480});
  CHECK(emergency_state(caught).triggered);
  REQUIRE(emergency_state(caught).causes.size() == 1);
  CHECK(emergency_state(caught).causes[0].find("audit_mismatch") != std::string::npos);
  CHECK(emergency_state(caught).causes[0].find("m3") != std::string::npos);

  TrialOutcome scanned;
  scanned.barcode_mismatch_found = 2;
  scanned.catch_events.push_back({"canvass_barcode_mismatch", "canvass", 0, 0});
  CHECK(emergency_state(scanned).triggered);

  // adaptive response inside a full simulation run stays within the reserve
  auto config = test::two_precinct_config();
  config.background_spoil_rate = 0.05;
  config.review_detect_probability = 0.5;
  TrialOptions opts;
  opts.monitor.enabled = true;
  opts.monitor.expected_rate = 0.005;  // alarms fire quickly against heavy spoiling
  const MalwareStrategy strategy = UniformSwitch{0.3, "", FlipRule{}};
  const auto rep =
      simulate(config, strategy, AdaptivePolicy{20, {}, 12, 4}, 200, 5150, opts);
  CHECK(rep.audits_run.mean >= 20.0);
  CHECK(rep.audits_run.mean <= 32.0);  // base + reserve bound
}
