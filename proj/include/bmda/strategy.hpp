#pragma once

// Malware strategy variants and the machine-side session logic. A strategy
// sees only an ObservableSession — what a machine can actually measure about
// the person in front of it — so scripted auditors are structurally
// indistinguishable from voters.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bmda/election.hpp"
#include "bmda/errors.hpp"
#include "bmda/rng.hpp"

namespace bmda {

// How a tampered ballot's selection in the target contest is rewritten.
struct FlipRule {
  enum class Kind { Rotate, To, Swap };
  Kind kind = Kind::Rotate;
  std::string to;    // Kind::To target
  std::string from;  // Kind::To: only rewrite this choice (empty = any)
  std::string a, b;  // Kind::Swap pair

  std::string apply(const std::vector<std::string>& choices, const std::string& current) const {
    switch (kind) {
      case Kind::Rotate:
        for (std::size_t i = 0; i < choices.size(); ++i)
          if (choices[i] == current) return choices[(i + 1) % choices.size()];
        return current;
      case Kind::To:
        if (!from.empty() && current != from) return current;
        return to;
      case Kind::Swap:
        if (current == a) return b;
        if (current == b) return a;
        return current;
    }
    return current;
  }

  bool changes(const std::vector<std::string>& choices, const std::string& current) const {
    return apply(choices, current) != current;
  }
};

// Pure predicate over machine-observable behavior. `la_test_only` names the
// pre-election-test trigger; live election sessions never satisfy it.
struct TriggerPredicate {
  std::optional<std::int64_t> min_speed_seconds;
  std::vector<std::string> required_flags;
  std::optional<int> window_start_minute;  // minute-of-day window [start, end)
  std::optional<int> window_end_minute;
  bool la_test_only = false;
};

struct Honest {};

struct UniformSwitch {
  double rate = 0.0;
  std::string contest;  // empty = top of ticket (first configured contest)
  FlipRule flip;
};

struct TriggeredSwitch {
  TriggerPredicate trigger;
  std::string contest;
  FlipRule flip;
};

struct DownBallot {
  std::string contest;
  double budget = 0.0;       // expected (rate mode) or exact (exact_count) tamper count
  bool exact_count = false;  // analytic cross-check mode
  FlipRule flip;
};

// Stateless machines cannot remember a knock across sessions, so the knock is
// an in-session selection pattern: the flip fires only when the entered
// selections contain every (contest, choice) pair of the pattern.
struct SecretKnock {
  std::map<std::string, std::string> knock;
  std::string contest;
  FlipRule flip;
};

struct InconsistentBarcode {
  double rate = 0.0;
  std::string contest;
  FlipRule flip;
};

using MalwareStrategy =
    std::variant<Honest, UniformSwitch, TriggeredSwitch, DownBallot, SecretKnock, InconsistentBarcode>;

inline const char* strategy_name(const MalwareStrategy& s) {
  struct V {
    const char* operator()(const Honest&) const { return "honest"; }
    const char* operator()(const UniformSwitch&) const { return "uniform_switch"; }
    const char* operator()(const TriggeredSwitch&) const { return "triggered_switch"; }
    const char* operator()(const DownBallot&) const { return "down_ballot"; }
    const char* operator()(const SecretKnock&) const { return "secret_knock"; }
    const char* operator()(const InconsistentBarcode&) const { return "inconsistent_barcode"; }
  };
  return std::visit(V{}, s);
}

// Everything a machine can observe about a session. There is deliberately no
// way to mark a session as an audit.
struct ObservableSession {
  std::string precinct;  // ballot style loaded into the machine
  int day = 0;
  int minute_of_day = 0;
  std::int64_t speed_seconds = 0;
  std::vector<std::string> flags;  // sorted
  std::map<std::string, std::string> selections;
};

inline bool trigger_matches(const TriggerPredicate& t, const ObservableSession& s) {
  if (t.la_test_only) return false;
  if (t.min_speed_seconds && s.speed_seconds < *t.min_speed_seconds) return false;
  for (const auto& f : t.required_flags)
    if (std::find(s.flags.begin(), s.flags.end(), f) == s.flags.end()) return false;
  if (t.window_start_minute && s.minute_of_day < *t.window_start_minute) return false;
  if (t.window_end_minute && s.minute_of_day >= *t.window_end_minute) return false;
  return true;
}

// Probability that a session drawn from `b` in a given slot fires the
// trigger; the flag draws are independent Bernoullis, so the mass factors.
inline double trigger_mass(const TriggerPredicate& t, const PrecinctBehavior& b, const Slot& slot) {
  if (t.la_test_only) return 0.0;
  if (t.window_start_minute && slot.start_minute < *t.window_start_minute) return 0.0;
  if (t.window_end_minute && slot.start_minute >= *t.window_end_minute) return 0.0;
  double mass = 1.0;
  if (t.min_speed_seconds) mass *= b.speed_at_least(*t.min_speed_seconds);
  for (const auto& f : t.required_flags) {
    auto it = b.flag_rates.find(f);
    mass *= it == b.flag_rates.end() ? 0.0 : it->second;
  }
  return mass;
}

// Normalized view of a strategy used by the trial engine.
struct StrategyProfile {
  bool attacks = false;
  std::string contest;       // target contest id
  FlipRule flip;
  bool barcode_only = false;  // InconsistentBarcode: printed text stays truthful
  // Per-session tamper probability components:
  double rate = 0.0;                       // Uniform / InconsistentBarcode / DownBallot rate mode
  const TriggerPredicate* trigger = nullptr;
  const std::map<std::string, std::string>* knock = nullptr;
  bool exact_count = false;
  std::int64_t exact_budget = 0;
};

inline void validate(const MalwareStrategy& s, const ElectionConfig& config) {
  auto need_contest = [&](const std::string& id) {
    if (!id.empty() && !config.find_contest(id))
      throw config_error("strategy targets unknown contest '" + id + "'");
  };
  if (const auto* u = std::get_if<UniformSwitch>(&s)) {
    if (u->rate < 0.0 || u->rate > 1.0) throw config_error("uniform_switch: rate out of [0,1]");
    need_contest(u->contest);
  } else if (const auto* t = std::get_if<TriggeredSwitch>(&s)) {
    need_contest(t->contest);
  } else if (const auto* d = std::get_if<DownBallot>(&s)) {
    if (d->contest.empty()) throw config_error("down_ballot: contest required");
    need_contest(d->contest);
    if (d->budget < 0.0) throw config_error("down_ballot: budget must be >= 0");
    const auto eligible = config.eligible_voters(d->contest);
    if (d->budget > static_cast<double>(eligible))
      throw config_error("down_ballot: budget exceeds eligible voters");
  } else if (const auto* k = std::get_if<SecretKnock>(&s)) {
    need_contest(k->contest);
    if (k->knock.empty()) throw config_error("secret_knock: empty knock pattern");
    for (const auto& [contest, choice] : k->knock) need_contest(contest);
  } else if (const auto* ib = std::get_if<InconsistentBarcode>(&s)) {
    if (ib->rate < 0.0 || ib->rate > 1.0) throw config_error("inconsistent_barcode: rate out of [0,1]");
    need_contest(ib->contest);
  }
}

inline StrategyProfile profile_strategy(const MalwareStrategy& s, const ElectionConfig& config) {
  validate(s, config);
  StrategyProfile p;
  auto default_contest = [&](const std::string& id) {
    return id.empty() ? config.contests.front().id : id;
  };
  if (std::holds_alternative<Honest>(s)) return p;
  if (const auto* u = std::get_if<UniformSwitch>(&s)) {
    p.attacks = u->rate > 0.0;
    p.contest = default_contest(u->contest);
    p.flip = u->flip;
    p.rate = u->rate;
  } else if (const auto* t = std::get_if<TriggeredSwitch>(&s)) {
    p.attacks = true;
    p.contest = default_contest(t->contest);
    p.flip = t->flip;
    p.trigger = &t->trigger;
  } else if (const auto* d = std::get_if<DownBallot>(&s)) {
    p.contest = d->contest;
    p.flip = d->flip;
    const std::int64_t eligible = config.eligible_voters(d->contest);
    p.exact_count = d->exact_count;
    if (d->exact_count) {
      p.exact_budget = std::llround(d->budget);
      p.rate = eligible > 0 ? d->budget / static_cast<double>(eligible) : 0.0;
      p.attacks = p.exact_budget > 0;
    } else {
      p.rate = eligible > 0 ? d->budget / static_cast<double>(eligible) : 0.0;
      p.attacks = p.rate > 0.0;
    }
  } else if (const auto* k = std::get_if<SecretKnock>(&s)) {
    p.attacks = true;
    p.contest = default_contest(k->contest);
    p.flip = k->flip;
    p.knock = &k->knock;
  } else if (const auto* ib = std::get_if<InconsistentBarcode>(&s)) {
    p.attacks = ib->rate > 0.0;
    p.contest = default_contest(ib->contest);
    p.flip = ib->flip;
    p.rate = ib->rate;
    p.barcode_only = true;
  }
  return p;
}

// Session-level tamper decision (used for every audit session and in
// per-voter detail mode). Returns true when the machine decides to rewrite
// the target contest this session. Exact-count DownBallot budgets are spent
// against the voter population; scripted sessions still face the equivalent
// per-session rate so the machine's behavior toward an auditor is identical.
inline bool session_tampers(const StrategyProfile& p, const ObservableSession& s, Rng& rng) {
  if (!p.attacks || s.selections.find(p.contest) == s.selections.end()) return false;
  if (p.trigger) return trigger_matches(*p.trigger, s);
  if (p.knock) {
    for (const auto& [contest, choice] : *p.knock) {
      auto it = s.selections.find(contest);
      if (it == s.selections.end() || it->second != choice) return false;
    }
    return true;
  }
  return rng.bernoulli(p.rate);
}

}  // namespace bmda
