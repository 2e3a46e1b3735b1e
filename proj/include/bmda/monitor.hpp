#pragma once

// Streaming spoiled-ballot monitor. Ingests spoil events and cumulative
// cast-count updates in timestamp order and flags locations (and the overall
// election) whose spoil count exceeds the Poisson confidence threshold for
// the ballots cast so far.
//
// An alarm means count > poisson_quantile(confidence, expected_rate * cast):
// the quantile itself is the largest count still inside the band. The
// thresholds are recomputed against each location's own cast feed, so the
// alarm state is a pure function of the multiset of ingested records.
//
// No correction is applied for repeatedly testing the stream as it grows;
// with many looks the false-alarm rate across a whole election exceeds the
// per-look level (readers should treat mid-stream alarms accordingly).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bmda/discrete.hpp"
#include "bmda/errors.hpp"
#include "bmda/events.hpp"

namespace bmda {

struct AlarmState {
  std::vector<std::string> location_alarms;  // sorted location ids
  bool global_alarm = false;
};

// A location's (or the election's) alarm boundary at its current cast count.
inline std::int64_t spoil_alarm_threshold(double confidence, double expected_rate,
                                          std::int64_t cast_so_far) {
  if (cast_so_far < 0) throw invalid_parameter("spoil_alarm_threshold: negative cast count");
  const double mu = expected_rate * static_cast<double>(cast_so_far);
  if (mu <= 0.0) return 0;  // nothing cast yet: any spoil is anomalous
  return poisson_quantile(confidence, mu);
}

// Single-writer streaming monitor; snapshot reads via state()/counters are
// safe from other threads only between ingest calls.
class SpoilMonitor {
 public:
  explicit SpoilMonitor(double expected_rate, double confidence = 0.95)
      : expected_rate_(expected_rate), confidence_(confidence) {
    if (!(expected_rate > 0.0 && expected_rate < 1.0))
      throw invalid_parameter("SpoilMonitor: expected_rate must be in (0,1)");
    if (!(confidence > 0.0 && confidence < 1.0))
      throw invalid_parameter("SpoilMonitor: confidence must be in (0,1)");
  }

  // The background rate is rarely known per location in advance; overrides
  // let scenarios model locations with different expected behavior.
  void set_location_rate(const std::string& location_id, double rate) {
    if (!(rate > 0.0 && rate < 1.0))
      throw invalid_parameter("SpoilMonitor: location rate must be in (0,1)");
    location_rates_[location_id] = rate;
  }

  AlarmState ingest_cast(const CastUpdate& u) {
    check_time(u.timestamp);
    auto& loc = locations_[u.location_id];
    if (u.cast_total < loc.cast)
      throw data_error("cast_total decreased for location '" + u.location_id + "'");
    total_cast_ += u.cast_total - loc.cast;
    loc.cast = u.cast_total;
    return state();
  }

  AlarmState ingest(const SpoilEvent& e) {
    check_time(e.timestamp);
    ++locations_[e.location_id].spoils;
    ++total_spoils_;
    return state();
  }

  AlarmState state() const {
    AlarmState s;
    for (const auto& [id, loc] : locations_) {
      if (loc.spoils > threshold_for(id, loc.cast)) s.location_alarms.push_back(id);
    }
    s.global_alarm = total_spoils_ > spoil_alarm_threshold(confidence_, expected_rate_, total_cast_);
    return s;
  }

  std::int64_t total_spoils() const { return total_spoils_; }
  std::int64_t total_cast() const { return total_cast_; }
  std::int64_t location_spoils(const std::string& id) const {
    auto it = locations_.find(id);
    return it == locations_.end() ? 0 : it->second.spoils;
  }
  std::int64_t location_threshold(const std::string& id) const {
    auto it = locations_.find(id);
    return threshold_for(id, it == locations_.end() ? 0 : it->second.cast);
  }
  std::int64_t global_threshold() const {
    return spoil_alarm_threshold(confidence_, expected_rate_, total_cast_);
  }
  std::int64_t last_timestamp() const { return last_timestamp_; }

 private:
  struct LocationCounts {
    std::int64_t spoils = 0;
    std::int64_t cast = 0;
  };

  void check_time(std::int64_t t) {
    if (t < last_timestamp_)
      throw out_of_order_event("event timestamp went backwards: " + format_iso8601(t) +
                               " after " + format_iso8601(last_timestamp_));
    last_timestamp_ = t;
  }

  std::int64_t threshold_for(const std::string& id, std::int64_t cast) const {
    auto rate_it = location_rates_.find(id);
    const double rate = rate_it == location_rates_.end() ? expected_rate_ : rate_it->second;
    return spoil_alarm_threshold(confidence_, rate, cast);
  }

  double expected_rate_;
  double confidence_;
  std::map<std::string, double> location_rates_;
  std::map<std::string, LocationCounts> locations_;
  std::int64_t total_spoils_ = 0;
  std::int64_t total_cast_ = 0;
  std::int64_t last_timestamp_ = 0;
};

}  // namespace bmda
