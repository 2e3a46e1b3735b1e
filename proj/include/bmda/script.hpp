#pragma once

// Deterministic audit-script generation. Entries are sampled i.i.d. from the
// voter behavior model and the fleet schedule, so a generated auditor looks —
// in distribution — exactly like a voter. The whole script is a pure function
// of (model, config, n_audits, seed): independent machines given the same
// dice-derived seed must produce byte-identical scripts, and any disagreement
// is treated as evidence of a compromised generator.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmda/behavior.hpp"
#include "bmda/election.hpp"
#include "bmda/errors.hpp"
#include "bmda/rng.hpp"
#include "bmda/version.hpp"

namespace bmda {

struct ScriptEntry {
  std::string machine_id;
  int slot_index = 0;
  int day = 0;
  int start_minute = 0;  // minute of day
  std::string precinct;  // ballot style to request
  std::map<std::string, std::string> selections;
  std::int64_t speed_seconds = 0;
  std::vector<std::string> flags;
};

struct AuditScript {
  std::vector<ScriptEntry> entries;  // sorted by (day, start_minute, machine_id)
  std::string model_digest;
  std::uint64_t seed = 0;

  json to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["model_digest"] = model_digest;
    j["seed"] = seed;
    json arr(json::value_t::array);
    for (const auto& e : entries) {
      json je;
      je["machine_id"] = e.machine_id;
      je["slot_index"] = e.slot_index;
      je["day"] = e.day;
      je["start_minute"] = e.start_minute;
      je["precinct"] = e.precinct;
      json sel(json::value_t::object);
      for (const auto& [c, ch] : e.selections) sel[c] = ch;
      je["selections"] = sel;
      je["speed_seconds"] = e.speed_seconds;
      je["flags"] = e.flags;
      arr.push_back(je);
    }
    j["entries"] = arr;
    return j;
  }

  static AuditScript from_json(const json& j) {
    AuditScript s;
    s.model_digest = j.value("model_digest", "");
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& je : j.at("entries")) {
      ScriptEntry e;
      e.machine_id = je.at("machine_id").get<std::string>();
      e.slot_index = je.at("slot_index").get<int>();
      e.day = je.at("day").get<int>();
      e.start_minute = je.at("start_minute").get<int>();
      e.precinct = je.at("precinct").get<std::string>();
      for (const auto& [c, ch] : je.at("selections").items()) e.selections[c] = ch.get<std::string>();
      e.speed_seconds = je.at("speed_seconds").get<std::int64_t>();
      e.flags = je.at("flags").get<std::vector<std::string>>();
      s.entries.push_back(e);
    }
    return s;
  }

  // Sorted keys, no whitespace: equality of scripts is equality of these bytes.
  std::string canonical_json() const { return to_json().dump(); }

  std::string digest() const {
    const std::string bytes = canonical_json();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64({bytes.data(), bytes.size()})));
    return buf;
  }
};

namespace detail {

// Weighted pick from a map<label, weight>; map iteration order makes the scan
// deterministic.
template <typename Map>
const typename Map::key_type& pick_weighted(Rng& rng, const Map& weights, double total) {
  double u = rng.uniform() * total;
  auto it = weights.begin();
  auto last = it;
  for (; it != weights.end(); ++it) {
    last = it;
    if (u < it->second) return it->first;
    u -= it->second;
  }
  return last->first;
}

}  // namespace detail

// Samples one voter-like profile for `precinct`: selections for every
// eligible contest, a session duration, and accessibility flags.
inline void sample_profile(Rng& rng, const ElectionConfig& config, const std::string& precinct_id,
                           const PrecinctBehavior& behavior, std::map<std::string, std::string>& selections,
                           std::int64_t& speed_seconds, std::vector<std::string>& flags) {
  selections.clear();
  flags.clear();
  for (const auto& contest : config.contests) {
    if (!contest.eligible(precinct_id)) continue;
    const auto& dist = behavior.preferences.at(contest.id);
    selections[contest.id] = detail::pick_weighted(rng, dist.probs, 1.0);
  }
  speed_seconds = static_cast<std::int64_t>(detail::pick_weighted(rng, behavior.speed_minutes, 1.0)) * 60;
  for (const auto& [flag, rate] : behavior.flag_rates)
    if (rng.bernoulli(rate)) flags.push_back(flag);
}

namespace detail {

// Trial-invariant lookups shared across per-trial script generations.
struct ScriptGenContext {
  std::map<std::string, std::vector<const Machine*>> machines_by_location;
  std::map<std::string, double> precinct_weights;
  double weight_total = 0.0;

  explicit ScriptGenContext(const ElectionConfig& config) {
    for (const auto& m : config.fleet) machines_by_location[m.location].push_back(&m);
    for (const auto& p : config.precincts) {
      if (p.voters <= 0) continue;
      precinct_weights[p.id] = static_cast<double>(p.voters);
      weight_total += static_cast<double>(p.voters);
    }
  }
};

// Core sampler; assumes config and model already validated (the multi-trial
// runner regenerates scripts per trial and validates once up front).
inline AuditScript generate_script_prevalidated(const VoterBehaviorModel& model,
                                                const ElectionConfig& config,
                                                const ScriptGenContext& ctx, std::int64_t n_audits,
                                                std::uint64_t seed) {
  AuditScript script;
  script.model_digest = model.digest();
  script.seed = seed;
  if (n_audits == 0) return script;
  if (config.schedule.empty()) throw config_error("generate_script: empty schedule");

  // Precinct weights follow the voter population, so audits land where votes
  // are cast.
  for (const auto& [pid, weight] : ctx.precinct_weights)
    if (!model.precincts.count(pid))
      throw config_error("generate_script: model missing precinct '" + pid + "'");
  if (ctx.precinct_weights.empty()) throw config_error("generate_script: no voters in config");

  const std::uint64_t capacity =
      static_cast<std::uint64_t>(config.fleet.size()) * config.schedule.size();
  if (static_cast<std::uint64_t>(n_audits) > capacity)
    throw schedule_exhausted("generate_script: " + std::to_string(n_audits) +
                             " audits exceed fleet-schedule capacity " + std::to_string(capacity));

  Rng rng(seed);
  std::set<std::pair<std::string, int>> booked;  // (machine, slot) pairs in use

  while (script.entries.size() < static_cast<std::size_t>(n_audits)) {
    // The precinct pick is i.i.d. proportional to voters and is never redrawn:
    // redrawing it on booking collisions would skew audits toward precincts
    // with more spare machine capacity.
    const std::string& precinct_id =
        detail::pick_weighted(rng, ctx.precinct_weights, ctx.weight_total);
    const Precinct* precinct = config.find_precinct(precinct_id);
    const auto& machines = ctx.machines_by_location.at(precinct->location);
    const auto& behavior = model.precincts.at(precinct_id);

    auto draw_slot = [&]() -> int {
      if (!behavior.arrival.empty()) return static_cast<int>(rng.categorical(behavior.arrival));
      return static_cast<int>(rng.below(config.schedule.size()));
    };

    const Machine* machine = nullptr;
    int slot_index = 0;
    const std::uint64_t location_capacity = machines.size() * config.schedule.size();
    for (std::uint64_t spin = 0; spin < location_capacity * 8 + 64; ++spin) {
      const Machine* m = machines[rng.below(machines.size())];
      const int s = draw_slot();
      if (booked.count({m->id, s})) continue;
      machine = m;
      slot_index = s;
      break;
    }
    if (!machine) {
      // Heavily booked location: fall back to a uniform pick over its free
      // (machine, slot) pairs.
      std::vector<std::pair<const Machine*, int>> free_pairs;
      for (const Machine* m : machines)
        for (std::size_t s = 0; s < config.schedule.size(); ++s)
          if (!booked.count({m->id, static_cast<int>(s)})) free_pairs.emplace_back(m, static_cast<int>(s));
      if (free_pairs.empty())
        throw schedule_exhausted("generate_script: no free machine/slot at location '" +
                                 precinct->location + "'");
      const auto& pick = free_pairs[rng.below(free_pairs.size())];
      machine = pick.first;
      slot_index = pick.second;
    }

    const Slot& slot = config.schedule[slot_index];
    ScriptEntry e;
    e.machine_id = machine->id;
    e.slot_index = slot_index;
    e.day = slot.day;
    e.start_minute = slot.start_minute + static_cast<int>(rng.below(slot.duration_minutes));
    e.precinct = precinct_id;
    sample_profile(rng, config, precinct_id, behavior, e.selections, e.speed_seconds, e.flags);
    booked.insert({machine->id, slot_index});
    script.entries.push_back(std::move(e));
  }

  std::sort(script.entries.begin(), script.entries.end(), [](const ScriptEntry& a, const ScriptEntry& b) {
    if (a.day != b.day) return a.day < b.day;
    if (a.start_minute != b.start_minute) return a.start_minute < b.start_minute;
    return a.machine_id < b.machine_id;
  });
  return script;
}

}  // namespace detail

inline AuditScript generate_script(const VoterBehaviorModel& model, const ElectionConfig& config,
                                   std::int64_t n_audits, std::uint64_t seed) {
  if (n_audits < 0) throw invalid_parameter("generate_script: n_audits must be >= 0");
  config.validate();
  model.validate();
  const detail::ScriptGenContext ctx(config);
  return detail::generate_script_prevalidated(model, config, ctx, n_audits, seed);
}

// True iff every script serializes to identical canonical bytes. A false
// result from independently seeded generators is the protocol's
// evidence-of-malware signal.
inline bool verify_agreement(std::span<const AuditScript> scripts) {
  if (scripts.size() < 2) throw invalid_parameter("verify_agreement: need at least 2 scripts");
  const std::string reference = scripts.front().canonical_json();
  for (std::size_t i = 1; i < scripts.size(); ++i)
    if (scripts[i].canonical_json() != reference) return false;
  return true;
}

}  // namespace bmda
