#pragma once

// Probabilistic voter model: what voters select, how long they take, which
// accessibility features they use, and when they arrive. Fitted per precinct
// from historical cast-vote summaries and event-log timing data; the same
// model drives both simulated voter populations and audit-script generation,
// which is what makes scripted sessions statistically indistinguishable from
// real ones.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmda/errors.hpp"
#include "bmda/events.hpp"
#include "bmda/rng.hpp"

namespace bmda {

using json = nlohmann::json;

struct Categorical {
  std::map<std::string, double> probs;  // label -> probability, sums to 1

  void validate(const std::string& what) const {
    double sum = 0.0;
    for (const auto& [label, p] : probs) {
      if (p < 0.0) throw config_error(what + ": negative probability for '" + label + "'");
      sum += p;
    }
    if (probs.empty() || std::abs(sum - 1.0) > 1e-9)
      throw config_error(what + ": probabilities must sum to 1");
  }
};

// Session-duration histogram binned to whole minutes. Sampled durations are
// reported in seconds (bin * 60).
using SpeedHistogram = std::map<int, double>;

inline SpeedHistogram default_speed_histogram() {
  return {{2, 0.10}, {3, 0.20}, {4, 0.25}, {5, 0.20}, {6, 0.12}, {7, 0.08}, {8, 0.05}};
}

struct PrecinctBehavior {
  std::map<std::string, Categorical> preferences;  // contest id -> choice distribution
  SpeedHistogram speed_minutes;
  std::map<std::string, double> flag_rates;  // accessibility flag -> frequency
  std::vector<double> arrival;               // weight per schedule slot; empty = uniform

  void validate(const std::string& precinct_id) const {
    for (const auto& [contest, dist] : preferences)
      dist.validate("precinct " + precinct_id + " contest " + contest);
    double sum = 0.0;
    for (const auto& [minute, p] : speed_minutes) {
      if (minute < 1) throw config_error("precinct " + precinct_id + ": speed bins are 1-based minutes");
      if (p < 0.0) throw config_error("precinct " + precinct_id + ": negative speed weight");
      sum += p;
    }
    if (speed_minutes.empty() || std::abs(sum - 1.0) > 1e-9)
      throw config_error("precinct " + precinct_id + ": speed histogram must sum to 1");
    for (const auto& [flag, rate] : flag_rates)
      if (rate < 0.0 || rate > 1.0)
        throw config_error("precinct " + precinct_id + ": flag rate for '" + flag + "' out of [0,1]");
    if (!arrival.empty()) {
      double asum = 0.0;
      for (double w : arrival) {
        if (w < 0.0) throw config_error("precinct " + precinct_id + ": negative arrival weight");
        asum += w;
      }
      if (std::abs(asum - 1.0) > 1e-9)
        throw config_error("precinct " + precinct_id + ": arrival profile must sum to 1");
    }
  }

  // P(speed_seconds >= threshold) under the minute-binned histogram.
  double speed_at_least(std::int64_t threshold_seconds) const {
    double mass = 0.0;
    for (const auto& [minute, p] : speed_minutes)
      if (static_cast<std::int64_t>(minute) * 60 >= threshold_seconds) mass += p;
    return mass;
  }
};

struct VoterBehaviorModel {
  std::map<std::string, PrecinctBehavior> precincts;
  bool default_timing_used = false;

  void validate() const {
    if (precincts.empty()) throw config_error("behavior model has no precincts");
    for (const auto& [id, b] : precincts) b.validate(id);
  }

  json to_json() const {
    json j;
    j["schema_version"] = 1;
    j["default_timing_used"] = default_timing_used;
    json jp(json::value_t::object);
    for (const auto& [id, b] : precincts) {
      json e;
      json prefs(json::value_t::object);
      for (const auto& [contest, dist] : b.preferences) {
        json d(json::value_t::object);
        for (const auto& [label, p] : dist.probs) d[label] = p;
        prefs[contest] = d;
      }
      e["preferences"] = prefs;
      json speed(json::value_t::object);
      for (const auto& [minute, p] : b.speed_minutes) speed[std::to_string(minute)] = p;
      e["speed_minutes"] = speed;
      json flags(json::value_t::object);
      for (const auto& [flag, rate] : b.flag_rates) flags[flag] = rate;
      e["flag_rates"] = flags;
      e["arrival"] = b.arrival;
      jp[id] = e;
    }
    j["precincts"] = jp;
    return j;
  }

  static VoterBehaviorModel from_json(const json& j) {
    VoterBehaviorModel m;
    m.default_timing_used = j.value("default_timing_used", false);
    if (!j.contains("precincts") || !j["precincts"].is_object())
      throw config_error("behavior model: missing precincts object");
    for (const auto& [id, e] : j["precincts"].items()) {
      PrecinctBehavior b;
      for (const auto& [contest, d] : e.at("preferences").items()) {
        Categorical dist;
        for (const auto& [label, p] : d.items()) dist.probs[label] = p.get<double>();
        b.preferences[contest] = dist;
      }
      for (const auto& [minute, p] : e.at("speed_minutes").items())
        b.speed_minutes[std::atoi(minute.c_str())] = p.get<double>();
      if (e.contains("flag_rates"))
        for (const auto& [flag, rate] : e["flag_rates"].items())
          b.flag_rates[flag] = rate.get<double>();
      if (e.contains("arrival")) b.arrival = e["arrival"].get<std::vector<double>>();
      m.precincts[id] = b;
    }
    m.validate();
    return m;
  }

  // Sorted-key, no-whitespace serialization: equal models produce equal bytes
  // regardless of construction order, so digests and agreement checks are
  // platform independent.
  std::string canonical_json() const { return to_json().dump(); }

  std::string digest() const {
    const std::string bytes = canonical_json();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64({bytes.data(), bytes.size()})));
    return buf;
  }
};

// ---------------------------------------------------------------------------
// Fitting from historical data

struct HistoricalBallotRecord {
  std::string precinct;
  std::string contest;
  std::string choice;
  std::int64_t count = 0;
};

struct TimingRecord {
  std::string machine;
  std::int64_t session_start = 0;  // epoch seconds
  std::int64_t session_end = 0;
};

// Maximum-likelihood categoricals per (precinct, contest) plus a shared
// minute-binned timing histogram. Without timing data the documented default
// histogram is used and flagged in the model metadata.
inline VoterBehaviorModel fit_model(std::span<const HistoricalBallotRecord> history,
                                    std::span<const TimingRecord> timing = {}) {
  if (history.empty()) throw data_error("fit_model: no historical ballot records");

  std::map<std::string, std::map<std::string, std::map<std::string, std::int64_t>>> counts;
  for (const auto& r : history) {
    if (r.count < 0) throw data_error("fit_model: negative count for precinct '" + r.precinct + "'");
    counts[r.precinct][r.contest][r.choice] += r.count;
  }

  VoterBehaviorModel model;
  for (const auto& [precinct, contests] : counts) {
    PrecinctBehavior b;
    for (const auto& [contest, choices] : contests) {
      std::int64_t total = 0;
      for (const auto& [choice, c] : choices) total += c;
      if (total == 0)
        throw data_error("fit_model: no ballots for precinct '" + precinct + "' contest '" + contest + "'");
      Categorical dist;
      for (const auto& [choice, c] : choices)
        dist.probs[choice] = static_cast<double>(c) / static_cast<double>(total);
      b.preferences[contest] = dist;
    }
    model.precincts[precinct] = b;
  }

  SpeedHistogram hist;
  if (timing.empty()) {
    hist = default_speed_histogram();
    model.default_timing_used = true;
  } else {
    std::map<int, std::int64_t> bins;
    std::int64_t total = 0;
    for (const auto& t : timing) {
      if (t.session_end < t.session_start) throw data_error("fit_model: session ends before it starts");
      const std::int64_t secs = t.session_end - t.session_start;
      const int minute = static_cast<int>((secs + 59) / 60);
      ++bins[minute < 1 ? 1 : minute];
      ++total;
    }
    for (const auto& [minute, c] : bins)
      hist[minute] = static_cast<double>(c) / static_cast<double>(total);
  }
  for (auto& [id, b] : model.precincts) b.speed_minutes = hist;

  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Delimited-file ingestion (column schemas documented in the README)

// "precinct,contest,choice,count" with header line.
inline std::vector<HistoricalBallotRecord> parse_history_csv(const std::string& text) {
  std::vector<HistoricalBallotRecord> out;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    f.push_back(cur);
    if (line_no == 1 && !f.empty() && f[0] == "precinct") continue;
    if (f.size() != 4) throw data_error("expected 4 fields (precinct,contest,choice,count)", line_no);
    char* endp = nullptr;
    const long long v = std::strtoll(f[3].c_str(), &endp, 10);
    if (endp == f[3].c_str() || *endp != '\0' || v < 0) throw data_error("bad count '" + f[3] + "'", line_no);
    out.push_back({f[0], f[1], f[2], v});
  }
  return out;
}

// "machine,session_start,session_end" with header line; ISO 8601 timestamps.
inline std::vector<TimingRecord> parse_timing_csv(const std::string& text) {
  std::vector<TimingRecord> out;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    f.push_back(cur);
    if (line_no == 1 && !f.empty() && f[0] == "machine") continue;
    if (f.size() != 3) throw data_error("expected 3 fields (machine,session_start,session_end)", line_no);
    out.push_back({f[0], parse_iso8601(f[1], line_no), parse_iso8601(f[2], line_no)});
  }
  return out;
}

}  // namespace bmda
