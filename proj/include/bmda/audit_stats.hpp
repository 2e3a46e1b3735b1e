#pragma once

// Closed-form detection statistics for live audits of ballot marking devices,
// in both with-replacement (fixed per-session cheat rate) and
// without-replacement (tampered subset of a finite ballot pool) models,
// plus the staffing arithmetic used to size an audit program.

#include <cmath>
#include <cstdint>

#include "bmda/errors.hpp"

namespace bmda {

// A fleet that cheats each session with probability `cheat_rate`, probed by
// `audits` independent scripted sessions.
struct AuditQuery {
  double cheat_rate = 0.0;
  std::int64_t audits = 0;
};

// A finite pool of `total_ballots` of which `tampered` were altered, observed
// by `audits` draws without replacement.
struct OracleQuery {
  std::int64_t total_ballots = 0;
  std::int64_t tampered = 0;
  std::int64_t audits = 0;
};

inline void validate(const AuditQuery& q) {
  if (!(q.cheat_rate >= 0.0 && q.cheat_rate <= 1.0))
    throw invalid_parameter("AuditQuery: cheat_rate must be in [0,1]");
  if (q.audits < 0) throw invalid_parameter("AuditQuery: audits must be >= 0");
}

inline void validate(const OracleQuery& q) {
  if (q.total_ballots <= 0) throw invalid_parameter("OracleQuery: total_ballots must be positive");
  if (q.tampered < 0 || q.tampered > q.total_ballots)
    throw invalid_parameter("OracleQuery: tampered must be in [0, total_ballots]");
  if (q.audits < 0 || q.audits > q.total_ballots)
    throw invalid_parameter("OracleQuery: audits must be in [0, total_ballots]");
}

// P(at least one of n audits catches a machine cheating with rate p)
// = 1 - (1-p)^n, evaluated as -expm1(n*log1p(-p)) so that tiny rates with
// large n keep full precision.
inline double detection_probability(const AuditQuery& q) {
  validate(q);
  if (q.audits == 0 || q.cheat_rate == 0.0) return 0.0;
  if (q.cheat_rate >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(q.audits) * std::log1p(-q.cheat_rate));
}

inline double detection_probability(double cheat_rate, std::int64_t audits) {
  return detection_probability(AuditQuery{cheat_rate, audits});
}

// Smallest n with detection_probability(p, n) >= confidence. Closed-form
// inversion (ceil of log(1-c)/log(1-p)) followed by a +/-1 integer check, so
// floating point cannot push the result off by one.
//
// Note: audits_needed(0.01, 0.99) == 459; some published staffing estimates
// quote 468, which the exact inversion does not reproduce.
inline std::int64_t audits_needed(double cheat_rate, double target_confidence) {
  if (!(cheat_rate > 0.0 && cheat_rate <= 1.0))
    throw invalid_parameter("audits_needed: cheat_rate must be in (0,1]");
  if (!(target_confidence > 0.0 && target_confidence < 1.0))
    throw invalid_parameter("audits_needed: target_confidence must be in (0,1)");
  if (cheat_rate >= 1.0) return 1;

  const double raw = std::log1p(-target_confidence) / std::log1p(-cheat_rate);
  auto n = static_cast<std::int64_t>(std::ceil(raw));
  if (n < 1) n = 1;
  while (n > 1 && detection_probability(cheat_rate, n - 1) >= target_confidence) --n;
  while (detection_probability(cheat_rate, n) < target_confidence) ++n;
  return n;
}

// P(all n audited ballots are clean) when sampling without replacement:
// prod_{i=0}^{n-1} (N-i-T)/(N-i) = C(N-T, n) / C(N, n), evaluated through
// log-gamma sums. Zero when the draws must hit a tampered ballot.
inline double oracle_survival(const OracleQuery& q) {
  validate(q);
  if (q.tampered == 0 || q.audits == 0) return 1.0;
  if (q.audits > q.total_ballots - q.tampered) return 0.0;
  const double N = static_cast<double>(q.total_ballots);
  const double T = static_cast<double>(q.tampered);
  const double n = static_cast<double>(q.audits);
  const double log_surv = std::lgamma(N - T + 1.0) - std::lgamma(N - T - n + 1.0) -
                          std::lgamma(N + 1.0) + std::lgamma(N - n + 1.0);
  return std::exp(log_surv);
}

inline double oracle_survival(std::int64_t total_ballots, std::int64_t tampered, std::int64_t audits) {
  return oracle_survival(OracleQuery{total_ballots, tampered, audits});
}

// Smallest n with oracle_survival(N, T, n) <= risk_limit (binary search over
// the nonincreasing survival curve).
inline std::int64_t oracle_min_audits(std::int64_t total_ballots, std::int64_t tampered,
                                      double risk_limit) {
  if (total_ballots <= 0) throw invalid_parameter("oracle_min_audits: total_ballots must be positive");
  if (tampered < 0 || tampered > total_ballots)
    throw invalid_parameter("oracle_min_audits: tampered out of range");
  if (!(risk_limit > 0.0 && risk_limit < 1.0))
    throw invalid_parameter("oracle_min_audits: risk_limit must be in (0,1)");
  if (tampered == 0)
    throw unreachable_limit("oracle_min_audits: survival stays 1 when nothing is tampered");

  std::int64_t lo = 0;                                   // survival(lo) > risk
  std::int64_t hi = total_ballots - tampered + 1;        // survival(hi) == 0 <= risk
  if (oracle_survival(total_ballots, tampered, 0) <= risk_limit) return 0;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (oracle_survival(total_ballots, tampered, mid) <= risk_limit)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// The with-replacement approximation of the same scenario: p = T/N held fixed
// across n audits. Converges to oracle_survival's complement as N grows.
inline double with_replacement_equivalent(const OracleQuery& q) {
  validate(q);
  const double p = static_cast<double>(q.tampered) / static_cast<double>(q.total_ballots);
  return detection_probability(p, q.audits);
}

// ---------------------------------------------------------------------------
// Staffing arithmetic

struct StaffingInput {
  std::int64_t total_audits = 0;
  double early_vote_share = 0.0;
  double election_day_share = 0.0;
  double mail_share = 0.0;
  std::int64_t early_locations = 0;
  std::int64_t early_days = 0;
  std::int64_t election_day_teams = 0;
};

// Fractional allocations are reported as-is; "roughly six audits per
// location" is more informative than a rounded integer.
struct StaffingPlan {
  double early_audits = 0.0;
  double election_day_audits = 0.0;
  double mail_audits = 0.0;  // always zero: there is no machine session to audit by mail
  double per_early_location = 0.0;
  double per_early_location_per_day = 0.0;
  double per_election_day_team = 0.0;
};

inline void validate(const StaffingInput& s) {
  if (s.total_audits < 0) throw invalid_parameter("StaffingInput: total_audits must be >= 0");
  if (s.early_vote_share < 0 || s.election_day_share < 0 || s.mail_share < 0)
    throw invalid_parameter("StaffingInput: shares must be nonnegative");
  const double sum = s.early_vote_share + s.election_day_share + s.mail_share;
  if (std::fabs(sum - 1.0) > 1e-9) throw invalid_parameter("StaffingInput: shares must sum to 1");
  if (s.early_locations <= 0 || s.early_days <= 0 || s.election_day_teams <= 0)
    throw invalid_parameter("StaffingInput: locations, days and teams must be positive");
}

inline StaffingPlan staffing_plan(const StaffingInput& s) {
  validate(s);
  StaffingPlan plan;
  const double total = static_cast<double>(s.total_audits);
  plan.early_audits = total * s.early_vote_share;
  plan.election_day_audits = total * s.election_day_share;
  plan.mail_audits = 0.0;
  plan.per_early_location = plan.early_audits / static_cast<double>(s.early_locations);
  plan.per_early_location_per_day = plan.per_early_location / static_cast<double>(s.early_days);
  plan.per_election_day_team = plan.election_day_audits / static_cast<double>(s.election_day_teams);
  return plan;
}

}  // namespace bmda
