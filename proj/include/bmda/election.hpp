#pragma once

// Election world configuration: contests, precincts, the machine fleet, the
// voting-period schedule, and voter review behavior. Validation is strict;
// the trial engine assumes a validated config.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bmda/behavior.hpp"
#include "bmda/errors.hpp"

namespace bmda {

struct Contest {
  std::string id;
  std::vector<std::string> choices;
  // Precinct ids eligible to vote this contest; empty means countywide.
  std::vector<std::string> precinct_scope;

  bool eligible(const std::string& precinct) const {
    return precinct_scope.empty() ||
           std::find(precinct_scope.begin(), precinct_scope.end(), precinct) != precinct_scope.end();
  }
};

struct Precinct {
  std::string id;
  std::string location;
  std::int64_t voters = 0;
  PrecinctBehavior behavior;
};

struct Machine {
  std::string id;
  std::string location;
};

// One voting time slot; times are discrete minutes.
struct Slot {
  int day = 0;
  int start_minute = 0;     // minute of day
  int duration_minutes = 0;

  std::int64_t absolute_start() const {
    return static_cast<std::int64_t>(day) * 1440 + start_minute;
  }
};

struct ElectionConfig {
  std::vector<Contest> contests;
  std::vector<Precinct> precincts;
  std::vector<Machine> fleet;
  std::vector<Slot> schedule;
  double background_spoil_rate = 0.0;      // per-voter chance of one self-caused spoil
  double review_detect_probability = 0.0;  // per-tampered-ballot chance the voter notices
  int max_spoil_attempts = 3;
  bool reattack_on_retry = false;
  double canvass_scan_rate = 0.0;          // fraction of cast ballots barcode-checked at canvass

  const Contest* find_contest(const std::string& id) const {
    for (const auto& c : contests)
      if (c.id == id) return &c;
    return nullptr;
  }

  const Precinct* find_precinct(const std::string& id) const {
    for (const auto& p : precincts)
      if (p.id == id) return &p;
    return nullptr;
  }

  std::vector<std::string> contests_for(const std::string& precinct) const {
    std::vector<std::string> out;
    for (const auto& c : contests)
      if (c.eligible(precinct)) out.push_back(c.id);
    return out;
  }

  std::int64_t eligible_voters(const std::string& contest_id) const {
    const Contest* c = find_contest(contest_id);
    if (!c) throw unknown_contest("no contest '" + contest_id + "'");
    std::int64_t total = 0;
    for (const auto& p : precincts)
      if (c->eligible(p.id)) total += p.voters;
    return total;
  }

  std::int64_t total_voters() const {
    std::int64_t total = 0;
    for (const auto& p : precincts) total += p.voters;
    return total;
  }

  std::vector<const Machine*> machines_at(const std::string& location) const {
    std::vector<const Machine*> out;
    for (const auto& m : fleet)
      if (m.location == location) out.push_back(&m);
    return out;
  }

  // Extracts the behavior model embedded in the config; this is what audit
  // scripts are generated from when no separately fitted model is supplied.
  VoterBehaviorModel behavior_model() const {
    VoterBehaviorModel m;
    for (const auto& p : precincts) m.precincts[p.id] = p.behavior;
    return m;
  }

  void validate() const {
    if (contests.empty()) throw config_error("config: no contests");
    if (precincts.empty()) throw config_error("config: no precincts");
    if (fleet.empty()) throw config_error("config: no machines");
    if (schedule.empty()) throw config_error("config: empty schedule");

    std::set<std::string> contest_ids, precinct_ids, machine_ids, locations;
    for (const auto& c : contests) {
      if (!contest_ids.insert(c.id).second) throw config_error("config: duplicate contest '" + c.id + "'");
      if (c.choices.size() < 2) throw config_error("contest '" + c.id + "' needs at least 2 choices");
      std::set<std::string> s(c.choices.begin(), c.choices.end());
      if (s.size() != c.choices.size()) throw config_error("contest '" + c.id + "' has duplicate choices");
    }
    for (const auto& p : precincts) {
      if (!precinct_ids.insert(p.id).second) throw config_error("config: duplicate precinct '" + p.id + "'");
      if (p.voters < 0) throw config_error("precinct '" + p.id + "' has negative voters");
    }
    for (const auto& c : contests)
      for (const auto& pid : c.precinct_scope)
        if (!precinct_ids.count(pid))
          throw config_error("contest '" + c.id + "' scopes unknown precinct '" + pid + "'");
    for (const auto& m : fleet) {
      if (!machine_ids.insert(m.id).second) throw config_error("config: duplicate machine '" + m.id + "'");
      locations.insert(m.location);
    }
    for (const auto& p : precincts)
      if (!locations.count(p.location))
        throw config_error("precinct '" + p.id + "' votes at location '" + p.location +
                           "' which has no machines");
    for (const auto& s : schedule)
      if (s.day < 0 || s.start_minute < 0 || s.start_minute >= 1440 || s.duration_minutes <= 0)
        throw config_error("config: bad schedule slot");
    if (background_spoil_rate < 0.0 || background_spoil_rate > 1.0)
      throw config_error("config: background_spoil_rate out of [0,1]");
    if (review_detect_probability < 0.0 || review_detect_probability > 1.0)
      throw config_error("config: review_detect_probability out of [0,1]");
    if (canvass_scan_rate < 0.0 || canvass_scan_rate > 1.0)
      throw config_error("config: canvass_scan_rate out of [0,1]");
    if (max_spoil_attempts < 1) throw config_error("config: max_spoil_attempts must be >= 1");

    for (const auto& p : precincts) {
      p.behavior.validate(p.id);
      if (!p.behavior.arrival.empty() && p.behavior.arrival.size() != schedule.size())
        throw config_error("precinct '" + p.id + "': arrival profile length must match schedule");
      for (const auto& cid : contests_for(p.id)) {
        auto it = p.behavior.preferences.find(cid);
        if (it == p.behavior.preferences.end())
          throw config_error("precinct '" + p.id + "' missing preferences for contest '" + cid + "'");
        const Contest* c = find_contest(cid);
        for (const auto& [choice, prob] : it->second.probs)
          if (std::find(c->choices.begin(), c->choices.end(), choice) == c->choices.end())
            throw config_error("precinct '" + p.id + "' preference names unknown choice '" + choice +
                               "' in contest '" + cid + "'");
      }
    }
  }
};

}  // namespace bmda
