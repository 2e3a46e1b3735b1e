#pragma once

// Official-side response policies. A static policy runs its script and
// nothing else; an adaptive policy holds auditors in reserve and sends them
// to locations whose spoil counts alarm, which is the officials' second move
// in the attacker-moves-first game.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bmda/election.hpp"
#include "bmda/errors.hpp"
#include "bmda/monitor.hpp"
#include "bmda/outcome.hpp"
#include "bmda/script.hpp"

namespace bmda {

struct StaticPolicy {
  std::int64_t audits = 0;                 // per-trial generated script size
  std::optional<AuditScript> fixed_script; // protocol runs: one pre-agreed script
};

struct AdaptivePolicy {
  std::int64_t base_audits = 0;
  std::optional<AuditScript> fixed_script;
  std::int64_t reserve = 0;    // extra audit entries available for reallocation
  std::int64_t per_alarm = 0;  // entries to send per alarmed location
};

using OfficialPolicy = std::variant<StaticPolicy, AdaptivePolicy>;

inline void validate(const OfficialPolicy& p) {
  if (const auto* s = std::get_if<StaticPolicy>(&p)) {
    if (s->audits < 0) throw config_error("policy: audits must be >= 0");
  } else if (const auto* a = std::get_if<AdaptivePolicy>(&p)) {
    if (a->base_audits < 0) throw config_error("policy: base_audits must be >= 0");
    if (a->reserve < 0) throw config_error("policy: reserve must be >= 0");
    if (a->per_alarm < 0) throw config_error("policy: per_alarm must be >= 0");
  }
}

inline std::int64_t base_audit_count(const OfficialPolicy& p) {
  if (const auto* s = std::get_if<StaticPolicy>(&p))
    return s->fixed_script ? static_cast<std::int64_t>(s->fixed_script->entries.size()) : s->audits;
  const auto& a = std::get<AdaptivePolicy>(p);
  return a.fixed_script ? static_cast<std::int64_t>(a.fixed_script->entries.size()) : a.base_audits;
}

struct PolicyAmendment {
  std::vector<ScriptEntry> entries;
  std::int64_t reserve_used = 0;
  bool capped = false;  // alarms wanted more auditors than the reserve held
};

// Draws up to `per_alarm` extra audit entries for each alarmed location from
// the same voter model, restricted to the remaining (not yet started) slots.
// Never allocates past the remaining reserve; deterministic given the seed.
inline PolicyAmendment apply_policy(const OfficialPolicy& policy, const AlarmState& alarms,
                                    const ElectionConfig& config, const VoterBehaviorModel& model,
                                    std::span<const int> remaining_slots,
                                    std::set<std::pair<std::string, int>>& booked,
                                    std::int64_t reserve_remaining, std::uint64_t seed) {
  validate(policy);
  PolicyAmendment out;
  const auto* adaptive = std::get_if<AdaptivePolicy>(&policy);
  if (!adaptive || alarms.location_alarms.empty() || remaining_slots.empty()) return out;

  Rng rng(seed);
  for (const auto& location : alarms.location_alarms) {
    // Precincts voting at this location, weighted by population.
    std::map<std::string, double> weights;
    double total = 0.0;
    for (const auto& p : config.precincts) {
      if (p.location != location || p.voters <= 0) continue;
      weights[p.id] = static_cast<double>(p.voters);
      total += static_cast<double>(p.voters);
    }
    const auto machines = config.machines_at(location);
    if (weights.empty() || machines.empty()) continue;

    for (std::int64_t k = 0; k < adaptive->per_alarm; ++k) {
      if (out.reserve_used >= reserve_remaining) {
        out.capped = true;
        return out;
      }
      // Find a free (machine, slot) pair among the remaining slots.
      ScriptEntry e;
      bool placed = false;
      for (std::size_t spin = 0; spin < machines.size() * remaining_slots.size() * 4 + 16; ++spin) {
        const Machine* m = machines[rng.below(machines.size())];
        const int slot_index = remaining_slots[rng.below(remaining_slots.size())];
        if (booked.count({m->id, slot_index})) continue;
        const Slot& slot = config.schedule[slot_index];
        e.machine_id = m->id;
        e.slot_index = slot_index;
        e.day = slot.day;
        e.start_minute = slot.start_minute + static_cast<int>(rng.below(slot.duration_minutes));
        booked.insert({m->id, slot_index});
        placed = true;
        break;
      }
      if (!placed) break;  // location fully booked for the rest of the election

      const std::string& precinct_id = detail::pick_weighted(rng, weights, total);
      e.precinct = precinct_id;
      const auto& behavior = model.precincts.at(precinct_id);
      sample_profile(rng, config, precinct_id, behavior, e.selections, e.speed_seconds, e.flags);
      out.entries.push_back(std::move(e));
      ++out.reserve_used;
    }
  }
  return out;
}

struct EmergencyState {
  bool triggered = false;
  std::vector<std::string> causes;
};

// One audit catch or one observed barcode/text inconsistency is enough: both
// are direct physical evidence, not statistics.
inline EmergencyState emergency_state(const TrialOutcome& outcome) {
  EmergencyState s;
  for (const auto& e : outcome.catch_events)
    s.causes.push_back(e.kind + " machine=" + e.machine_id + " day=" + std::to_string(e.day) +
                       " minute=" + std::to_string(e.minute));
  s.triggered = outcome.audit_catches > 0 || outcome.barcode_mismatch_found > 0;
  if (s.triggered && s.causes.empty())
    s.causes.push_back("barcode_mismatch found=" + std::to_string(outcome.barcode_mismatch_found));
  return s;
}

}  // namespace bmda
