#pragma once

// Shared scenario builders for the test suite.

#include <string>

#include "bmda/election.hpp"

namespace bmda::test {

// One precinct, one two-choice contest, 10 machines, 14 days x 4 slots.
inline ElectionConfig small_config(std::int64_t voters = 2000, double spoil_rate = 0.0,
                                   double detect = 0.0) {
  ElectionConfig c;
  c.contests.push_back({"county", {"A", "B"}, {}});
  Precinct p;
  p.id = "p1";
  p.location = "loc1";
  p.voters = voters;
  p.behavior.preferences["county"] = Categorical{{{"A", 0.55}, {"B", 0.45}}};
  p.behavior.speed_minutes = default_speed_histogram();
  c.precincts.push_back(p);
  for (int i = 0; i < 10; ++i) c.fleet.push_back({"m" + std::to_string(i), "loc1"});
  for (int day = 0; day < 14; ++day)
    for (int s = 0; s < 4; ++s) c.schedule.push_back({day, 420 + s * 195, 195});
  c.background_spoil_rate = spoil_rate;
  c.review_detect_probability = detect;
  return c;
}

// Two precincts at separate locations with distinct preferences.
inline ElectionConfig two_precinct_config(std::int64_t v1 = 6000, std::int64_t v2 = 4000) {
  ElectionConfig c;
  c.contests.push_back({"county", {"A", "B"}, {}});
  c.contests.push_back({"local", {"yes", "no"}, {"p2"}});
  Precinct p1;
  p1.id = "p1";
  p1.location = "north";
  p1.voters = v1;
  p1.behavior.preferences["county"] = Categorical{{{"A", 0.6}, {"B", 0.4}}};
  p1.behavior.speed_minutes = default_speed_histogram();
  Precinct p2;
  p2.id = "p2";
  p2.location = "south";
  p2.voters = v2;
  p2.behavior.preferences["county"] = Categorical{{{"A", 0.3}, {"B", 0.7}}};
  p2.behavior.preferences["local"] = Categorical{{{"yes", 0.65}, {"no", 0.35}}};
  p2.behavior.speed_minutes = default_speed_histogram();
  c.precincts.push_back(p1);
  c.precincts.push_back(p2);
  for (int i = 0; i < 30; ++i) c.fleet.push_back({"n" + std::to_string(i), "north"});
  for (int i = 0; i < 20; ++i) c.fleet.push_back({"s" + std::to_string(i), "south"});
  for (int day = 0; day < 14; ++day)
    for (int s = 0; s < 4; ++s) c.schedule.push_back({day, 420 + s * 195, 195});
  c.background_spoil_rate = 0.01;
  return c;
}

// The down-ballot county: 1.191M countywide voters plus a 9,000-voter city
// with its own proposition.
inline ElectionConfig county_config(double detect = 0.0, std::int64_t budget_unused = 0) {
  (void)budget_unused;
  ElectionConfig c;
  c.contests.push_back({"statewide", {"R", "D"}, {}});
  c.contests.push_back({"city_prop", {"for", "against"}, {"city"}});
  Precinct rest;
  rest.id = "county_rest";
  rest.location = "county";
  rest.voters = 1191000;
  rest.behavior.preferences["statewide"] = Categorical{{{"R", 0.52}, {"D", 0.48}}};
  rest.behavior.speed_minutes = default_speed_histogram();
  Precinct city;
  city.id = "city";
  city.location = "cityloc";
  city.voters = 9000;
  city.behavior.preferences["statewide"] = Categorical{{{"R", 0.55}, {"D", 0.45}}};
  city.behavior.preferences["city_prop"] = Categorical{{{"for", 0.655}, {"against", 0.345}}};
  city.behavior.speed_minutes = default_speed_histogram();
  c.precincts.push_back(rest);
  c.precincts.push_back(city);
  for (int i = 0; i < 100; ++i) c.fleet.push_back({"cty" + std::to_string(i), "county"});
  for (int i = 0; i < 5; ++i) c.fleet.push_back({"city" + std::to_string(i), "cityloc"});
  for (int day = 0; day < 14; ++day)
    for (int s = 0; s < 4; ++s) c.schedule.push_back({day, 420 + s * 195, 195});
  c.background_spoil_rate = 0.01;
  c.review_detect_probability = detect;
  return c;
}

}  // namespace bmda::test
