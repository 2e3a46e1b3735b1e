#pragma once

// Poisson-based thresholds for spoiled-ballot counts: how many spoils sit
// inside the confidence band for a given election size, what margin movement
// an attacker can buy while staying inside it, and how many tamper attempts
// that budget allows.

#include <cmath>
#include <cstdint>

#include "bmda/discrete.hpp"
#include "bmda/errors.hpp"

namespace bmda {

struct SpoilageModel {
  std::int64_t election_size = 0;  // ballots expected to be cast
  double expected_rate = 0.0;      // background spoil fraction, in (0,1)
  double detection_fraction = 0.0; // chance a voter notices a tampered ballot, in (0,1]
  double confidence = 0.95;
};

inline void validate(const SpoilageModel& m) {
  if (m.election_size <= 0) throw invalid_parameter("SpoilageModel: election_size must be positive");
  if (!(m.expected_rate > 0.0 && m.expected_rate < 1.0))
    throw invalid_parameter("SpoilageModel: expected_rate must be in (0,1)");
  if (!(m.detection_fraction > 0.0 && m.detection_fraction <= 1.0))
    throw invalid_parameter("SpoilageModel: detection_fraction must be in (0,1]");
  if (!(m.confidence > 0.0 && m.confidence < 1.0))
    throw invalid_parameter("SpoilageModel: confidence must be in (0,1)");
  if (!(static_cast<double>(m.election_size) * m.expected_rate > 0.0))
    throw invalid_parameter("SpoilageModel: expected spoil mean must be positive");
}

struct SpoilageThreshold {
  double mean = 0.0;           // election_size * expected_rate
  std::int64_t threshold = 0;  // largest count still inside the confidence band
  std::int64_t excess = 0;     // threshold - round(mean)
};

inline SpoilageThreshold spoilage_threshold(const SpoilageModel& m) {
  validate(m);
  SpoilageThreshold out;
  out.mean = static_cast<double>(m.election_size) * m.expected_rate;
  out.threshold = poisson_quantile(m.confidence, out.mean);
  out.excess = out.threshold - std::llround(out.mean);
  return out;
}

// Maximum margin-of-victory movement (in percent of ballots cast) an attack
// can cause while its expected extra spoils stay inside the confidence band.
// The factor 200 = 100% * 2: each undetected flip takes one vote from one
// candidate and hands it to the other.
inline double margin_delta(const SpoilageModel& m) {
  const SpoilageThreshold t = spoilage_threshold(m);
  return 200.0 * (static_cast<double>(t.threshold) - t.mean) /
         (static_cast<double>(m.election_size) * m.detection_fraction);
}

// Largest tamper count A whose expected extra spoils (A * detection_fraction)
// stay at or below the threshold excess: floor(excess / detection_fraction).
// The 1e-9 forgiveness absorbs quotients like 74/0.1 that land a hair under
// the true integer.
inline std::int64_t undetectable_attack_budget(const SpoilageModel& m) {
  const SpoilageThreshold t = spoilage_threshold(m);
  return static_cast<std::int64_t>(
      std::floor(static_cast<double>(t.excess) / m.detection_fraction + 1e-9));
}

}  // namespace bmda
