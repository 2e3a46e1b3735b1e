#pragma once

// Scenario files: one JSON document describing the election world, the
// malware strategy, the official policy, monitoring, and the run request.
// The schema is versioned; see the README for the full field reference.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmda/election.hpp"
#include "bmda/errors.hpp"
#include "bmda/policy.hpp"
#include "bmda/sim.hpp"
#include "bmda/strategy.hpp"
#include "bmda/version.hpp"

namespace bmda {

struct Scenario {
  ElectionConfig config;
  MalwareStrategy strategy = Honest{};
  OfficialPolicy policy = StaticPolicy{};
  std::string fixed_script_file;  // optional; resolved by the caller
  TrialOptions options;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  bool seed_in_file = false;
};

namespace detail {

inline double req_prob(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw config_error(where + ": missing '" + key + "'");
  const double v = j.at(key).get<double>();
  return v;
}

inline PrecinctBehavior parse_behavior(const json& j, const std::string& where) {
  PrecinctBehavior b;
  if (!j.contains("preferences")) throw config_error(where + ": missing preferences");
  for (const auto& [contest, dist] : j.at("preferences").items()) {
    Categorical c;
    for (const auto& [choice, p] : dist.items()) c.probs[choice] = p.get<double>();
    b.preferences[contest] = c;
  }
  if (j.contains("speed_minutes")) {
    for (const auto& [minute, p] : j.at("speed_minutes").items())
      b.speed_minutes[std::atoi(minute.c_str())] = p.get<double>();
  } else {
    b.speed_minutes = default_speed_histogram();
  }
  if (j.contains("flag_rates"))
    for (const auto& [flag, rate] : j.at("flag_rates").items()) b.flag_rates[flag] = rate.get<double>();
  if (j.contains("arrival")) b.arrival = j.at("arrival").get<std::vector<double>>();
  return b;
}

inline FlipRule parse_flip(const json& j, const std::string& where) {
  FlipRule f;
  if (j.is_null()) return f;  // rotate by default
  const std::string kind = j.value("kind", "rotate");
  if (kind == "rotate") {
    f.kind = FlipRule::Kind::Rotate;
  } else if (kind == "to") {
    f.kind = FlipRule::Kind::To;
    f.to = j.value("to", "");
    f.from = j.value("from", "");
    if (f.to.empty()) throw config_error(where + ": flip kind 'to' needs a 'to' choice");
  } else if (kind == "swap") {
    f.kind = FlipRule::Kind::Swap;
    f.a = j.value("a", "");
    f.b = j.value("b", "");
    if (f.a.empty() || f.b.empty()) throw config_error(where + ": flip kind 'swap' needs 'a' and 'b'");
  } else {
    throw config_error(where + ": unknown flip kind '" + kind + "'");
  }
  return f;
}

inline TriggerPredicate parse_trigger(const json& j) {
  TriggerPredicate t;
  if (j.contains("min_speed_seconds")) t.min_speed_seconds = j.at("min_speed_seconds").get<std::int64_t>();
  if (j.contains("required_flags")) t.required_flags = j.at("required_flags").get<std::vector<std::string>>();
  if (j.contains("window_start_minute")) t.window_start_minute = j.at("window_start_minute").get<int>();
  if (j.contains("window_end_minute")) t.window_end_minute = j.at("window_end_minute").get<int>();
  t.la_test_only = j.value("la_test_only", false);
  return t;
}

}  // namespace detail

inline ElectionConfig parse_election(const json& j) {
  ElectionConfig c;
  if (!j.contains("contests")) throw config_error("election: missing contests");
  for (const auto& jc : j.at("contests")) {
    Contest contest;
    contest.id = jc.at("id").get<std::string>();
    contest.choices = jc.at("choices").get<std::vector<std::string>>();
    if (jc.contains("precincts")) contest.precinct_scope = jc.at("precincts").get<std::vector<std::string>>();
    c.contests.push_back(std::move(contest));
  }
  if (!j.contains("precincts")) throw config_error("election: missing precincts");
  for (const auto& jp : j.at("precincts")) {
    Precinct p;
    p.id = jp.at("id").get<std::string>();
    p.location = jp.at("location").get<std::string>();
    p.voters = jp.at("voters").get<std::int64_t>();
    p.behavior = detail::parse_behavior(jp, "precinct " + p.id);
    c.precincts.push_back(std::move(p));
  }
  if (!j.contains("fleet")) throw config_error("election: missing fleet");
  for (const auto& jm : j.at("fleet")) {
    if (jm.contains("count")) {
      // Compact form: {"location": L, "count": N, "prefix": P} expands to
      // P-001..P-N at location L.
      const auto count = jm.at("count").get<int>();
      const std::string prefix = jm.value("prefix", "m");
      const std::string location = jm.at("location").get<std::string>();
      for (int i = 1; i <= count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s-%03d", prefix.c_str(), i);
        c.fleet.push_back({buf, location});
      }
    } else {
      c.fleet.push_back({jm.at("id").get<std::string>(), jm.at("location").get<std::string>()});
    }
  }
  if (!j.contains("schedule")) throw config_error("election: missing schedule");
  for (const auto& js : j.at("schedule")) {
    Slot s;
    s.start_minute = js.value("start_minute", 420);
    s.duration_minutes = js.at("duration_minutes").get<int>();
    if (js.contains("days")) {
      const int days = js.at("days").get<int>();
      for (int d = 0; d < days; ++d) {
        s.day = d;
        c.schedule.push_back(s);
      }
    } else {
      s.day = js.value("day", 0);
      c.schedule.push_back(s);
    }
  }
  c.background_spoil_rate = j.value("background_spoil_rate", 0.0);
  c.review_detect_probability = j.value("review_detect_probability", 0.0);
  c.max_spoil_attempts = j.value("max_spoil_attempts", 3);
  c.reattack_on_retry = j.value("reattack_on_retry", false);
  c.canvass_scan_rate = j.value("canvass_scan_rate", 0.0);
  c.validate();
  return c;
}

inline MalwareStrategy parse_strategy(const json& j) {
  const std::string kind = j.value("kind", "honest");
  if (kind == "honest") return Honest{};
  if (kind == "uniform_switch") {
    UniformSwitch s;
    s.rate = detail::req_prob(j, "rate", "uniform_switch");
    s.contest = j.value("contest", "");
    s.flip = detail::parse_flip(j.contains("flip") ? j.at("flip") : json(), "uniform_switch");
    return s;
  }
  if (kind == "triggered_switch") {
    TriggeredSwitch s;
    if (!j.contains("trigger")) throw config_error("triggered_switch: missing trigger");
    s.trigger = detail::parse_trigger(j.at("trigger"));
    s.contest = j.value("contest", "");
    s.flip = detail::parse_flip(j.contains("flip") ? j.at("flip") : json(), "triggered_switch");
    return s;
  }
  if (kind == "down_ballot") {
    DownBallot s;
    s.contest = j.value("contest", "");
    s.budget = detail::req_prob(j, "budget", "down_ballot");
    s.exact_count = j.value("exact_count", false);
    s.flip = detail::parse_flip(j.contains("flip") ? j.at("flip") : json(), "down_ballot");
    return s;
  }
  if (kind == "secret_knock") {
    SecretKnock s;
    if (j.contains("knock"))
      for (const auto& [contest, choice] : j.at("knock").items())
        s.knock[contest] = choice.get<std::string>();
    s.contest = j.value("contest", "");
    s.flip = detail::parse_flip(j.contains("flip") ? j.at("flip") : json(), "secret_knock");
    return s;
  }
  if (kind == "inconsistent_barcode") {
    InconsistentBarcode s;
    s.rate = detail::req_prob(j, "rate", "inconsistent_barcode");
    s.contest = j.value("contest", "");
    s.flip = detail::parse_flip(j.contains("flip") ? j.at("flip") : json(), "inconsistent_barcode");
    return s;
  }
  throw config_error("unknown strategy kind '" + kind + "'");
}

inline Scenario parse_scenario(const json& j) {
  Scenario sc;
  const int version = j.value("schema_version", 0);
  if (version != kSchemaVersion)
    throw config_error("scenario: schema_version " + std::to_string(version) + " unsupported (want " +
                       std::to_string(kSchemaVersion) + ")");
  if (!j.contains("election")) throw config_error("scenario: missing election");
  sc.config = parse_election(j.at("election"));
  sc.strategy = j.contains("strategy") ? parse_strategy(j.at("strategy")) : MalwareStrategy{Honest{}};
  validate(sc.strategy, sc.config);

  if (j.contains("policy")) {
    const json& jp = j.at("policy");
    const std::string kind = jp.value("kind", "static");
    if (kind == "static") {
      StaticPolicy p;
      p.audits = jp.value("audits", std::int64_t{0});
      sc.policy = p;
    } else if (kind == "adaptive") {
      AdaptivePolicy p;
      p.base_audits = jp.value("audits", jp.value("base_audits", std::int64_t{0}));
      p.reserve = jp.value("reserve", std::int64_t{0});
      p.per_alarm = jp.value("per_alarm", std::int64_t{0});
      sc.policy = p;
    } else {
      throw config_error("unknown policy kind '" + kind + "'");
    }
    sc.fixed_script_file = jp.value("script_file", "");
  }
  validate(sc.policy);

  if (j.contains("monitor")) {
    const json& jm = j.at("monitor");
    sc.options.monitor.enabled = jm.value("enabled", true);
    sc.options.monitor.expected_rate = jm.value("expected_rate", 0.01);
    sc.options.monitor.confidence = jm.value("confidence", 0.95);
    if (jm.contains("location_rates"))
      for (const auto& [location, rate] : jm.at("location_rates").items())
        sc.options.monitor.location_rates[location] = rate.get<double>();
  }

  const std::string detail_str = j.value("detail", "aggregate");
  if (detail_str == "aggregate") {
    sc.options.detail = TrialOptions::Detail::Aggregate;
  } else if (detail_str == "per_voter") {
    sc.options.detail = TrialOptions::Detail::PerVoter;
  } else {
    throw config_error("scenario: detail must be 'aggregate' or 'per_voter'");
  }
  sc.options.log_spoil_events = j.value("log_spoil_events", false);

  sc.trials = j.value("trials", std::int64_t{1});
  if (sc.trials < 1) throw config_error("scenario: trials must be >= 1");
  if (j.contains("seed")) {
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.seed_in_file = true;
  }
  return sc;
}

inline Scenario load_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("scenario: invalid JSON: ") + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const json::exception& e) {
    throw config_error(std::string("scenario: ") + e.what());
  }
}

}  // namespace bmda
