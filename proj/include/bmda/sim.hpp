#pragma once

// Seeded Monte Carlo trial engine. A trial walks the voting period in
// schedule order: voter sessions interact with machines (which may tamper),
// voters review and spoil, scripted audit sessions probe the same machines,
// and everything that reaches a ballot box is tallied on intent / printed
// text / barcode channels.
//
// Two detail levels produce the same distributions:
//   aggregate  - voter populations advance through the tamper/review/spoil
//                state machine in batched exact draws (binomial, multinomial,
//                hypergeometric); audit sessions are always simulated
//                individually. Default; holds up at millions of voters.
//   per_voter  - every voter session simulated individually; used for small
//                configs, event-level logs, and cross-validation. Strategies
//                keyed on entered selections (secret knock) force this path,
//                since the batched splits condition only on the target
//                contest.
//
// Batching is exact because tamper and spoil paths depend on the intent only
// through the target contest choice: partitioning each batch by that choice
// makes every subgroup i.i.d., and the remaining contests are filled in by
// conditional multinomials afterwards.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bmda/discrete.hpp"
#include "bmda/election.hpp"
#include "bmda/errors.hpp"
#include "bmda/events.hpp"
#include "bmda/monitor.hpp"
#include "bmda/outcome.hpp"
#include "bmda/policy.hpp"
#include "bmda/rng.hpp"
#include "bmda/script.hpp"
#include "bmda/strategy.hpp"

namespace bmda {

// Exported event logs anchor day 0 of the schedule here.
inline constexpr std::int64_t kEpochBase = detail::days_from_civil(2020, 11, 3) * 86400;

struct MonitorConfig {
  bool enabled = false;
  double expected_rate = 0.01;
  double confidence = 0.95;
  std::map<std::string, double> location_rates;  // per-location overrides
};

struct TrialOptions {
  enum class Detail { Aggregate, PerVoter };
  Detail detail = Detail::Aggregate;
  bool log_spoil_events = false;
  MonitorConfig monitor;  // disabled by default
};

namespace detail {

struct ChainResult {
  std::int64_t cast_clean = 0;
  std::int64_t cast_tampered = 0;
  std::int64_t abandoned = 0;
  std::int64_t spoils = 0;
  std::int64_t tamper_attempts = 0;
};

// Batched tamper/review/spoil chain for n voters whose fresh sessions are
// visibly tampered with probability t (or exactly `forced_tampered` of them
// in exact-count mode). Each voter carries at most one self-caused spoil
// (probability b, consumed on use); a noticed tamper spoils and retries; a
// spoil on the final permitted attempt abandons the voter.
inline ChainResult run_chain(Rng& rng, std::int64_t n, double t, bool visible_to_voter, double d,
                             double b, int max_attempts, bool reattack,
                             std::int64_t forced_tampered = -1) {
  ChainResult res;
  if (n <= 0) return res;

  struct Pool {
    std::int64_t count;
    int attempt;
    bool clumsy_left;  // self-spoil event still available
    bool retry;
  };
  std::vector<Pool> pools{{n, 1, true, false}};

  for (std::size_t i = 0; i < pools.size(); ++i) {
    const Pool pool = pools[i];
    if (pool.count <= 0) continue;

    std::int64_t tampered;
    if (!pool.retry && forced_tampered >= 0) {
      tampered = forced_tampered;
    } else {
      const double t_eff = (pool.retry && !reattack) ? 0.0 : t;
      tampered = t_eff > 0.0 ? static_cast<std::int64_t>(
                                   binomial_sample(rng, static_cast<std::uint64_t>(pool.count), t_eff))
                             : 0;
    }
    const std::int64_t noticed =
        (visible_to_voter && tampered > 0 && d > 0.0)
            ? static_cast<std::int64_t>(binomial_sample(rng, static_cast<std::uint64_t>(tampered), d))
            : 0;
    const std::int64_t unnoticed = tampered - noticed;
    const std::int64_t untampered = pool.count - tampered;
    const std::int64_t clumsy_t =
        (pool.clumsy_left && unnoticed > 0 && b > 0.0)
            ? static_cast<std::int64_t>(binomial_sample(rng, static_cast<std::uint64_t>(unnoticed), b))
            : 0;
    const std::int64_t clumsy_c =
        (pool.clumsy_left && untampered > 0 && b > 0.0)
            ? static_cast<std::int64_t>(binomial_sample(rng, static_cast<std::uint64_t>(untampered), b))
            : 0;

    res.tamper_attempts += tampered;
    res.spoils += noticed + clumsy_t + clumsy_c;
    res.cast_tampered += unnoticed - clumsy_t;
    res.cast_clean += untampered - clumsy_c;

    if (pool.attempt >= max_attempts) {
      res.abandoned += noticed + clumsy_t + clumsy_c;
    } else {
      if (noticed > 0) pools.push_back({noticed, pool.attempt + 1, pool.clumsy_left, true});
      if (clumsy_t + clumsy_c > 0) pools.push_back({clumsy_t + clumsy_c, pool.attempt + 1, false, true});
    }
  }
  return res;
}

}  // namespace detail

inline void validate_plan(const ElectionConfig& config, const AuditScript& plan) {
  for (const auto& e : plan.entries) {
    bool machine_ok = false;
    for (const auto& m : config.fleet)
      if (m.id == e.machine_id) {
        machine_ok = true;
        break;
      }
    if (!machine_ok) throw config_error("audit plan uses unknown machine '" + e.machine_id + "'");
    if (e.slot_index < 0 || static_cast<std::size_t>(e.slot_index) >= config.schedule.size())
      throw config_error("audit plan entry has bad slot index");
    if (!config.find_precinct(e.precinct))
      throw config_error("audit plan uses unknown precinct '" + e.precinct + "'");
  }
}

// Precomputed, trial-invariant view of (config, strategy). Build once, run
// many seeds against it; const after construction so trials can share it
// across threads.
class TrialEngine {
 public:
  TrialEngine(const ElectionConfig& config, const MalwareStrategy& strategy)
      : config_(config), profile_(profile_strategy(strategy, config)) {
    config_.validate();
    has_knock_ = profile_.knock != nullptr;
    trigger_windowed_ = profile_.trigger && (profile_.trigger->window_start_minute ||
                                             profile_.trigger->window_end_minute);

    slot_order_.resize(config_.schedule.size());
    for (std::size_t i = 0; i < slot_order_.size(); ++i) slot_order_[i] = static_cast<int>(i);
    std::sort(slot_order_.begin(), slot_order_.end(), [&](int a, int b) {
      const Slot& sa = config_.schedule[a];
      const Slot& sb = config_.schedule[b];
      if (sa.day != sb.day) return sa.day < sb.day;
      if (sa.start_minute != sb.start_minute) return sa.start_minute < sb.start_minute;
      return a < b;
    });

    const Contest* target = profile_.attacks ? config_.find_contest(profile_.contest) : nullptr;
    for (const auto& p : config_.precincts) {
      PrecinctPre pre;
      pre.precinct = &p;
      pre.machines = config_.machines_at(p.location);
      for (const auto& c : config_.contests)
        if (c.eligible(p.id)) pre.contests.push_back(&c);
      if (target && target->eligible(p.id)) {
        pre.target_eligible = true;
        const auto& prefs = p.behavior.preferences.at(target->id);
        for (const auto& [choice, prob] : prefs.probs) {
          pre.target_choices.push_back(choice);
          pre.target_probs.push_back(prob);
          const std::string flipped = profile_.flip.apply(target->choices, choice);
          pre.target_flipped.push_back(flipped);
          pre.target_changes.push_back(flipped != choice);
        }
      }
      for (const auto& c : pre.contests) {
        auto& prefs = pre.contest_prefs.emplace_back();
        prefs.contest = c;
        for (const auto& [choice, prob] : p.behavior.preferences.at(c->id).probs) {
          prefs.choices.push_back(choice);
          prefs.probs.push_back(prob);
        }
      }
      precincts_.push_back(std::move(pre));
    }
    target_ = target;
  }

  const ElectionConfig& config() const { return config_; }
  const StrategyProfile& profile() const { return profile_; }

  TrialOutcome run(const AuditScript& plan, std::uint64_t seed, const TrialOptions& opts,
                   const OfficialPolicy* policy = nullptr,
                   const VoterBehaviorModel* model = nullptr) const;

 private:
  struct ContestPrefs {
    const Contest* contest = nullptr;
    std::vector<std::string> choices;
    std::vector<double> probs;
  };

  struct PrecinctPre {
    const Precinct* precinct = nullptr;
    std::vector<const Machine*> machines;
    std::vector<const Contest*> contests;  // eligible for this ballot style
    std::vector<ContestPrefs> contest_prefs;
    bool target_eligible = false;
    std::vector<std::string> target_choices;
    std::vector<double> target_probs;
    std::vector<std::string> target_flipped;
    std::vector<bool> target_changes;
  };

  struct RunState;

  void run_audit_session(RunState& st, const ScriptEntry& entry) const;
  void run_voter_batch_aggregate(RunState& st, const PrecinctPre& pre, int slot_index,
                                 std::int64_t n) const;
  void run_voters_individually(RunState& st, const PrecinctPre& pre) const;
  void note_spoils(RunState& st, const PrecinctPre& pre, int slot_index, std::int64_t count) const;

  const ElectionConfig& config_;
  StrategyProfile profile_;
  const Contest* target_ = nullptr;
  bool has_knock_ = false;
  bool trigger_windowed_ = false;
  std::vector<int> slot_order_;
  std::vector<PrecinctPre> precincts_;
};

struct TrialEngine::RunState {
  Rng rng;
  const TrialOptions* opts = nullptr;
  TrialOutcome out;
  // Running per-location counters for monitor thresholds and adaptive policy.
  std::map<std::string, std::int64_t> location_cast;
  std::map<std::string, std::int64_t> location_spoils;
  // Exact-count budget distribution.
  std::int64_t exact_pop_left = 0;
  std::int64_t exact_marks_left = 0;

  explicit RunState(std::uint64_t seed) : rng(seed) {}
};

inline void TrialEngine::note_spoils(RunState& st, const PrecinctPre& pre, int slot_index,
                                     std::int64_t count) const {
  if (count <= 0) return;
  st.out.spoil_events += count;
  const std::string& location = pre.precinct->location;
  st.out.spoils_by_location[location] += count;
  st.location_spoils[location] += count;
  if (st.opts->log_spoil_events) {
    const Slot& slot = config_.schedule[slot_index];
    const std::int64_t ts = kEpochBase + slot.day * 86400 + slot.start_minute * 60;
    for (std::int64_t k = 0; k < count; ++k) {
      const Machine* m = pre.machines[static_cast<std::size_t>(k) % pre.machines.size()];
      st.out.spoil_log.push_back({ts, location, m->id});
    }
  }
}

inline void TrialEngine::run_audit_session(RunState& st, const ScriptEntry& entry) const {
  ++st.out.audits_run;
  ObservableSession obs;
  obs.precinct = entry.precinct;
  obs.day = entry.day;
  obs.minute_of_day = entry.start_minute;
  obs.speed_seconds = entry.speed_seconds;
  obs.flags = entry.flags;
  obs.selections = entry.selections;

  const bool tampers = session_tampers(profile_, obs, st.rng);
  if (!tampers) return;

  const auto sel = entry.selections.find(profile_.contest);
  if (sel == entry.selections.end()) return;
  const std::string flipped = profile_.flip.apply(target_->choices, sel->second);
  if (flipped == sel->second) return;  // flip rule no-ops on this selection

  // The auditor verifies the printed text against the script and the barcode
  // against the text; either mismatch is a catch.
  const char* kind = profile_.barcode_only ? "barcode_mismatch" : "audit_mismatch";
  ++st.out.audit_catches;
  st.out.catch_events.push_back({kind, entry.machine_id, entry.day, entry.start_minute});
}

inline void TrialEngine::run_voter_batch_aggregate(RunState& st, const PrecinctPre& pre,
                                                   int slot_index, std::int64_t n) const {
  if (n <= 0) return;
  const double b = config_.background_spoil_rate;
  const double d = config_.review_detect_probability;
  const int max_attempts = config_.max_spoil_attempts;
  const bool reattack = config_.reattack_on_retry;

  std::int64_t batch_cast = 0;
  std::int64_t batch_abandoned = 0;

  const bool attacked = profile_.attacks && pre.target_eligible && !has_knock_;
  if (attacked) {
    // Partition the batch by target-contest intent; tamper paths are i.i.d.
    // within each part.
    double t = profile_.rate;
    if (profile_.trigger)
      t = trigger_mass(*profile_.trigger, pre.precinct->behavior, config_.schedule[slot_index]);

    const auto intent_counts =
        multinomial_sample(st.rng, static_cast<std::uint64_t>(n),
                           {pre.target_probs.data(), pre.target_probs.size()});

    auto& tally = st.out.tallies[target_->id];
    for (std::size_t xi = 0; xi < intent_counts.size(); ++xi) {
      const auto nx = static_cast<std::int64_t>(intent_counts[xi]);
      if (nx == 0) continue;
      const bool changes = pre.target_changes[xi];

      std::int64_t forced = -1;
      if (profile_.exact_count) {
        // Spread the fixed tamper budget over eligible voters without
        // replacement; no-op selections consume budget but alter nothing.
        const std::int64_t marks = static_cast<std::int64_t>(hypergeometric_sample(
            st.rng, static_cast<std::uint64_t>(st.exact_pop_left),
            static_cast<std::uint64_t>(st.exact_marks_left), static_cast<std::uint64_t>(nx)));
        st.exact_pop_left -= nx;
        st.exact_marks_left -= marks;
        forced = changes ? marks : 0;
      }

      const auto chain = detail::run_chain(st.rng, nx, changes ? t : 0.0, !profile_.barcode_only, d, b,
                                           max_attempts, reattack, changes ? forced : -1);

      const std::string& intent = pre.target_choices[xi];
      const std::string& flipped = pre.target_flipped[xi];
      tally.by_intent[intent] += chain.cast_clean + chain.cast_tampered;
      tally.by_text[intent] += chain.cast_clean + (profile_.barcode_only ? chain.cast_tampered : 0);
      if (!profile_.barcode_only) tally.by_text[flipped] += chain.cast_tampered;
      tally.by_barcode[intent] += chain.cast_clean;
      tally.by_barcode[flipped] += chain.cast_tampered;

      st.out.tamper_attempts += chain.tamper_attempts;
      st.out.tampered_cast += chain.cast_tampered;
      if (profile_.barcode_only) st.out.barcode_mismatch_cast += chain.cast_tampered;
      batch_cast += chain.cast_clean + chain.cast_tampered;
      batch_abandoned += chain.abandoned;
      note_spoils(st, pre, slot_index, chain.spoils);
    }
  } else {
    if (profile_.exact_count && pre.target_eligible && !has_knock_) {
      // Eligible but unattacked pools cannot occur: attacks==true whenever a
      // positive exact budget exists. Keep the population ledger consistent.
      st.exact_pop_left -= n;
    }
    const auto chain =
        detail::run_chain(st.rng, n, 0.0, true, d, b, max_attempts, reattack);
    batch_cast = chain.cast_clean;
    batch_abandoned = chain.abandoned;
    note_spoils(st, pre, slot_index, chain.spoils);
  }

  // Contests other than the attacked one (or all of them for honest pools)
  // are conditionally multinomial among the batch's cast ballots.
  for (const auto& prefs : pre.contest_prefs) {
    if (attacked && prefs.contest == target_) continue;
    const auto counts = multinomial_sample(st.rng, static_cast<std::uint64_t>(batch_cast),
                                           {prefs.probs.data(), prefs.probs.size()});
    auto& tally = st.out.tallies[prefs.contest->id];
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const auto c = static_cast<std::int64_t>(counts[i]);
      if (c == 0) continue;
      const std::string& choice = prefs.choices[i];
      tally.by_intent[choice] += c;
      tally.by_text[choice] += c;
      tally.by_barcode[choice] += c;
    }
  }

  st.out.cast += batch_cast;
  st.out.abandoned += batch_abandoned;
  st.location_cast[pre.precinct->location] += batch_cast;
}

inline void TrialEngine::run_voters_individually(RunState& st, const PrecinctPre& pre) const {
  const double b = config_.background_spoil_rate;
  const double d = config_.review_detect_probability;
  const int max_attempts = config_.max_spoil_attempts;
  const bool reattack = config_.reattack_on_retry;
  const auto& behavior = pre.precinct->behavior;

  ObservableSession obs;
  obs.precinct = pre.precinct->id;

  for (std::int64_t v = 0; v < pre.precinct->voters; ++v) {
    // Arrival slot, behavior, and full intent vector.
    int slot_index;
    if (!behavior.arrival.empty()) {
      slot_index = static_cast<int>(st.rng.categorical(behavior.arrival));
    } else {
      slot_index = static_cast<int>(st.rng.below(config_.schedule.size()));
    }
    const Slot& slot = config_.schedule[slot_index];

    obs.day = slot.day;
    obs.minute_of_day = slot.start_minute + static_cast<int>(st.rng.below(slot.duration_minutes));
    obs.speed_seconds =
        static_cast<std::int64_t>(detail::pick_weighted(st.rng, behavior.speed_minutes, 1.0)) * 60;
    obs.flags.clear();
    for (const auto& [flag, rate] : behavior.flag_rates)
      if (st.rng.bernoulli(rate)) obs.flags.push_back(flag);
    obs.selections.clear();
    for (const auto& prefs : pre.contest_prefs) {
      const std::size_t pick = st.rng.categorical({prefs.probs.data(), prefs.probs.size()});
      obs.selections[prefs.contest->id] = prefs.choices[pick];
    }

    bool clumsy = st.rng.bernoulli(b);
    bool counted_pop = false;
    bool cast_ballot = false;
    bool cast_tampered = false;
    std::string printed_target;

    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
      const bool fresh = attempt == 1;
      bool tampers = false;
      if (fresh || reattack) {
        if (profile_.exact_count && pre.target_eligible) {
          if (fresh) {
            // Sequential sampling without replacement over eligible voters.
            if (!counted_pop) {
              const double p_mark = st.exact_pop_left > 0
                                        ? static_cast<double>(st.exact_marks_left) /
                                              static_cast<double>(st.exact_pop_left)
                                        : 0.0;
              tampers = st.rng.bernoulli(p_mark);
              --st.exact_pop_left;
              if (tampers) --st.exact_marks_left;
              counted_pop = true;
            }
          } else {
            tampers = st.rng.bernoulli(profile_.rate);  // reattack falls back to the rate
          }
        } else {
          tampers = session_tampers(profile_, obs, st.rng);
        }
      }

      bool visible_flip = false;
      bool barcode_flip = false;
      if (tampers) {
        const auto sel = obs.selections.find(profile_.contest);
        if (sel != obs.selections.end()) {
          const std::string flipped = profile_.flip.apply(target_->choices, sel->second);
          if (flipped != sel->second) {
            printed_target = flipped;
            if (profile_.barcode_only)
              barcode_flip = true;
            else
              visible_flip = true;
            ++st.out.tamper_attempts;
          }
        }
      }

      const bool noticed = visible_flip && st.rng.bernoulli(d);
      if (noticed) {
        note_spoils(st, pre, slot_index, 1);
        if (attempt == max_attempts) {
          ++st.out.abandoned;
          break;
        }
        continue;
      }
      if (clumsy) {
        clumsy = false;
        note_spoils(st, pre, slot_index, 1);
        if (attempt == max_attempts) {
          ++st.out.abandoned;
          break;
        }
        continue;
      }
      cast_ballot = true;
      cast_tampered = visible_flip || barcode_flip;
      if (cast_tampered) {
        ++st.out.tampered_cast;
        if (barcode_flip) ++st.out.barcode_mismatch_cast;
      }
      break;
    }

    if (!cast_ballot) continue;
    ++st.out.cast;
    ++st.location_cast[pre.precinct->location];
    for (const auto& prefs : pre.contest_prefs) {
      const std::string& intent = obs.selections.at(prefs.contest->id);
      auto& tally = st.out.tallies[prefs.contest->id];
      tally.by_intent[intent] += 1;
      const bool flip_here = cast_tampered && prefs.contest == target_;
      const std::string& text = (flip_here && !profile_.barcode_only) ? printed_target : intent;
      const std::string& code = flip_here ? printed_target : intent;
      tally.by_text[text] += 1;
      tally.by_barcode[code] += 1;
    }
  }
}

inline TrialOutcome TrialEngine::run(const AuditScript& plan, std::uint64_t seed,
                                     const TrialOptions& opts, const OfficialPolicy* policy,
                                     const VoterBehaviorModel* model) const {
  RunState st(seed);
  st.opts = &opts;
  st.out.voters = config_.total_voters();

  // Pre-fill tallies so margins work even for zero-vote choices.
  for (const auto& c : config_.contests) {
    auto& tally = st.out.tallies[c.id];
    for (const auto& choice : c.choices) {
      tally.by_intent[choice] = 0;
      tally.by_text[choice] = 0;
      tally.by_barcode[choice] = 0;
    }
  }

  const bool per_voter = opts.detail == TrialOptions::Detail::PerVoter || has_knock_;
  const auto* adaptive = policy ? std::get_if<AdaptivePolicy>(policy) : nullptr;
  const bool slot_resolution =
      !per_voter && (opts.log_spoil_events || adaptive != nullptr || trigger_windowed_);

  if (profile_.exact_count) {
    st.exact_pop_left = config_.eligible_voters(profile_.contest);
    st.exact_marks_left = profile_.exact_budget;
    if (st.exact_marks_left > st.exact_pop_left)
      throw config_error("exact tamper budget exceeds eligible voters");
  }

  // Audit entries grouped by slot.
  std::vector<std::vector<const ScriptEntry*>> audits_by_slot(config_.schedule.size());
  // Adaptive additions live here; audits_by_slot holds pointers into it, so
  // the capacity is fixed upfront at the reserve bound (total amendments can
  // never exceed the reserve) to keep them stable.
  std::vector<ScriptEntry> amendment_storage;
  amendment_storage.reserve(adaptive ? static_cast<std::size_t>(adaptive->reserve) : 0);
  for (const auto& e : plan.entries) audits_by_slot[e.slot_index].push_back(&e);
  for (auto& v : audits_by_slot)
    std::sort(v.begin(), v.end(), [](const ScriptEntry* a, const ScriptEntry* b) {
      if (a->start_minute != b->start_minute) return a->start_minute < b->start_minute;
      return a->machine_id < b->machine_id;
    });

  if (per_voter) {
    for (const auto& pre : precincts_) run_voters_individually(st, pre);
    for (int slot_index : slot_order_)
      for (const ScriptEntry* e : audits_by_slot[slot_index]) run_audit_session(st, *e);
  } else if (!slot_resolution) {
    // One batch per precinct; slot only matters for audit entries.
    for (const auto& pre : precincts_)
      run_voter_batch_aggregate(st, pre, slot_order_.front(), pre.precinct->voters);
    for (int slot_index : slot_order_)
      for (const ScriptEntry* e : audits_by_slot[slot_index]) run_audit_session(st, *e);
  } else {
    // Walk the schedule slot by slot; voters arrive per their profiles.
    std::vector<std::vector<std::int64_t>> arrivals(precincts_.size());
    for (std::size_t pi = 0; pi < precincts_.size(); ++pi) {
      const auto& pre = precincts_[pi];
      std::vector<double> weights = pre.precinct->behavior.arrival;
      if (weights.empty()) weights.assign(config_.schedule.size(), 1.0);
      const auto counts = multinomial_sample(
          st.rng, static_cast<std::uint64_t>(pre.precinct->voters), {weights.data(), weights.size()});
      arrivals[pi].assign(counts.begin(), counts.end());
    }

    std::set<std::pair<std::string, int>> booked;
    for (const auto& e : plan.entries) booked.insert({e.machine_id, e.slot_index});
    std::set<std::string> alarmed_handled;
    std::int64_t reserve_left = adaptive ? adaptive->reserve : 0;

    for (std::size_t oi = 0; oi < slot_order_.size(); ++oi) {
      const int slot_index = slot_order_[oi];
      for (std::size_t pi = 0; pi < precincts_.size(); ++pi)
        run_voter_batch_aggregate(st, precincts_[pi], slot_index, arrivals[pi][slot_index]);
      for (const ScriptEntry* e : audits_by_slot[slot_index]) run_audit_session(st, *e);

      if (adaptive && opts.monitor.enabled && reserve_left > 0) {
        AlarmState alarms;
        for (const auto& [location, spoils] : st.location_spoils) {
          if (alarmed_handled.count(location)) continue;
          auto rate_it = opts.monitor.location_rates.find(location);
          const double rate = rate_it == opts.monitor.location_rates.end() ? opts.monitor.expected_rate
                                                                           : rate_it->second;
          const std::int64_t threshold =
              spoil_alarm_threshold(opts.monitor.confidence, rate, st.location_cast[location]);
          if (spoils > threshold) alarms.location_alarms.push_back(location);
        }
        if (!alarms.location_alarms.empty()) {
          st.out.any_alarm_during_trial = true;
          std::vector<int> remaining(slot_order_.begin() + static_cast<std::ptrdiff_t>(oi) + 1,
                                     slot_order_.end());
          const VoterBehaviorModel fallback = model ? VoterBehaviorModel{} : config_.behavior_model();
          const VoterBehaviorModel& m = model ? *model : fallback;
          auto amendment =
              apply_policy(*policy, alarms, config_, m, remaining, booked, reserve_left,
                           derive_seed(seed, 303 + oi));
          reserve_left -= amendment.reserve_used;
          for (auto& e : amendment.entries) {
            amendment_storage.push_back(std::move(e));
            audits_by_slot[amendment_storage.back().slot_index].push_back(&amendment_storage.back());
          }
          for (const auto& location : alarms.location_alarms) alarmed_handled.insert(location);
        }
      }
    }
  }

  // Canvass: a fraction of cast ballots gets its barcode checked against the
  // printed text.
  if (st.out.barcode_mismatch_cast > 0 && config_.canvass_scan_rate > 0.0) {
    const auto found = static_cast<std::int64_t>(binomial_sample(
        st.rng, static_cast<std::uint64_t>(st.out.barcode_mismatch_cast), config_.canvass_scan_rate));
    if (found > 0) {
      st.out.barcode_mismatch_found += found;
      st.out.catch_events.push_back({"canvass_barcode_mismatch", "canvass", 0, 0});
    }
  }
  for (const auto& e : st.out.catch_events)
    if (std::string_view(e.kind) == "barcode_mismatch") ++st.out.barcode_mismatch_found;

  // Final monitor state over the whole stream.
  if (opts.monitor.enabled) {
    for (const auto& [location, spoils] : st.location_spoils) {
      auto rate_it = opts.monitor.location_rates.find(location);
      const double rate =
          rate_it == opts.monitor.location_rates.end() ? opts.monitor.expected_rate : rate_it->second;
      const std::int64_t threshold =
          spoil_alarm_threshold(opts.monitor.confidence, rate, st.location_cast[location]);
      if (spoils > threshold) st.out.final_alarms.location_alarms.push_back(location);
    }
    const std::int64_t global_threshold =
        spoil_alarm_threshold(opts.monitor.confidence, opts.monitor.expected_rate, st.out.cast);
    st.out.final_alarms.global_alarm = st.out.spoil_events > global_threshold;
    if (st.out.final_alarms.global_alarm || !st.out.final_alarms.location_alarms.empty())
      st.out.any_alarm_during_trial = true;
  }

  st.out.emergency = st.out.audit_catches > 0 || st.out.barcode_mismatch_found > 0;

  if (opts.log_spoil_events)
    std::sort(st.out.spoil_log.begin(), st.out.spoil_log.end(),
              [](const SpoilEvent& a, const SpoilEvent& b) {
                if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                if (a.location_id != b.location_id) return a.location_id < b.location_id;
                return a.machine_id < b.machine_id;
              });
  return st.out;
}

// Single-trial entry point: pure function of (config, strategy, plan, seed).
inline TrialOutcome simulate_trial(const ElectionConfig& config, const MalwareStrategy& strategy,
                                   const AuditScript& plan, std::uint64_t seed,
                                   const TrialOptions& opts = {}) {
  TrialEngine engine(config, strategy);
  validate_plan(config, plan);
  return engine.run(plan, seed, opts);
}

}  // namespace bmda
