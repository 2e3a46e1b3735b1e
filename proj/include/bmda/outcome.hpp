#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bmda/errors.hpp"
#include "bmda/events.hpp"
#include "bmda/monitor.hpp"

namespace bmda {

struct CatchEvent {
  std::string kind;  // "audit_mismatch" | "barcode_mismatch" | "canvass_barcode_mismatch"
  std::string machine_id;
  int day = 0;
  int minute = 0;
};

// Cast-ballot tallies for one contest, kept on three channels: what voters
// intended, what the printed text says, and what the barcode encodes.
struct ContestTally {
  std::map<std::string, std::int64_t> by_intent;
  std::map<std::string, std::int64_t> by_text;
  std::map<std::string, std::int64_t> by_barcode;
};

struct TrialOutcome {
  std::int64_t voters = 0;
  std::int64_t cast = 0;
  std::int64_t abandoned = 0;  // exhausted their spoil attempts; logged, not cast

  std::int64_t tamper_attempts = 0;  // sessions where the machine altered the ballot
  std::int64_t tampered_cast = 0;    // altered ballots that reached the ballot box
  std::int64_t spoil_events = 0;

  std::int64_t barcode_mismatch_cast = 0;   // inconsistent ballots sitting in the box
  std::int64_t barcode_mismatch_found = 0;  // inconsistencies actually observed

  std::int64_t audits_run = 0;
  std::int64_t audit_catches = 0;
  std::vector<CatchEvent> catch_events;

  std::map<std::string, ContestTally> tallies;
  std::map<std::string, std::int64_t> spoils_by_location;
  AlarmState final_alarms;
  bool any_alarm_during_trial = false;
  bool emergency = false;

  std::vector<SpoilEvent> spoil_log;  // populated only when event logging is on
};

struct MarginReport {
  std::string contest;
  std::string leader;     // top choice by intent among cast ballots
  std::string runner_up;
  std::int64_t true_margin = 0;      // intent channel
  std::int64_t reported_margin = 0;  // barcode channel (what scanners tally)
  std::int64_t shift = 0;            // reported - true; +2 per flip toward the leader
  double shift_pct = 0.0;            // shift as percent of ballots cast in the contest
};

inline MarginReport margin_report(const TrialOutcome& outcome, const std::string& contest_id) {
  auto it = outcome.tallies.find(contest_id);
  if (it == outcome.tallies.end()) throw unknown_contest("margin_report: no contest '" + contest_id + "'");
  const ContestTally& tally = it->second;

  // Top two by intent; ties break toward the lexicographically smaller label
  // so the report is deterministic.
  std::string leader, runner_up;
  std::int64_t best = -1, second = -1;
  for (const auto& [choice, votes] : tally.by_intent) {
    if (votes > best) {
      second = best;
      runner_up = leader;
      best = votes;
      leader = choice;
    } else if (votes > second) {
      second = votes;
      runner_up = choice;
    }
  }
  if (second < 0) throw unknown_contest("margin_report: contest '" + contest_id + "' has fewer than 2 choices");

  auto get = [](const std::map<std::string, std::int64_t>& m, const std::string& k) {
    auto i = m.find(k);
    return i == m.end() ? std::int64_t{0} : i->second;
  };

  MarginReport r;
  r.contest = contest_id;
  r.leader = leader;
  r.runner_up = runner_up;
  r.true_margin = best - second;
  r.reported_margin = get(tally.by_barcode, leader) - get(tally.by_barcode, runner_up);
  r.shift = r.reported_margin - r.true_margin;
  std::int64_t total = 0;
  for (const auto& [choice, votes] : tally.by_barcode) total += votes;
  r.shift_pct = total > 0 ? 100.0 * static_cast<double>(r.shift) / static_cast<double>(total) : 0.0;
  return r;
}

}  // namespace bmda
