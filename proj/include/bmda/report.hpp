#pragma once

// Multi-trial runner and its aggregated report. Trials are embarrassingly
// parallel: each one derives its own seed from the master seed, so a parallel
// run and a serial run of the same request produce identical reports.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bmda/policy.hpp"
#include "bmda/sim.hpp"
#include "bmda/version.hpp"

namespace bmda {

struct MetricStats {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

struct SimulationReport {
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
  std::string strategy;
  std::string detail;
  std::int64_t base_audits = 0;

  double detection_rate = 0.0;  // trials with at least one audit catch
  double detection_se = 0.0;
  double emergency_rate = 0.0;
  double emergency_se = 0.0;
  double alarm_rate = 0.0;      // trials ending with the global alarm on
  double alarm_se = 0.0;

  MetricStats audits_run, tamper_attempts, tampered_cast, spoils, cast, abandoned,
      barcode_mismatch_cast;
  std::map<std::string, MetricStats> margin_shift_votes;  // per contest

  json to_json() const {
    auto stats = [](const MetricStats& m) { return json{{"mean", m.mean}, {"se", m.se}}; };
    json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kVersion;
    j["trials"] = trials;
    j["master_seed"] = master_seed;
    j["strategy"] = strategy;
    j["detail"] = detail;
    j["base_audits"] = base_audits;
    j["detection"] = json{{"rate", detection_rate}, {"se", detection_se}};
    j["emergency"] = json{{"rate", emergency_rate}, {"se", emergency_se}};
    j["global_alarm"] = json{{"rate", alarm_rate}, {"se", alarm_se}};
    j["metrics"] = json{{"audits_run", stats(audits_run)},
                        {"tamper_attempts", stats(tamper_attempts)},
                        {"tampered_cast", stats(tampered_cast)},
                        {"spoils", stats(spoils)},
                        {"cast", stats(cast)},
                        {"abandoned", stats(abandoned)},
                        {"barcode_mismatch_cast", stats(barcode_mismatch_cast)}};
    json shifts(json::value_t::object);
    for (const auto& [contest, m] : margin_shift_votes) shifts[contest] = stats(m);
    j["margin_shift_votes"] = shifts;
    return j;
  }
};

namespace detail {

struct TrialSummary {
  bool caught = false;
  bool emergency = false;
  bool alarm = false;
  std::int64_t audits = 0, attempts = 0, tampered_cast = 0, spoils = 0, cast = 0, abandoned = 0,
               bc_cast = 0;
  std::vector<std::int64_t> shifts;
};

inline MetricStats column_stats(const std::vector<TrialSummary>& rows,
                                std::int64_t TrialSummary::* field) {
  MetricStats m;
  const auto n = static_cast<double>(rows.size());
  if (rows.empty()) return m;
  double sum = 0.0;
  for (const auto& r : rows) sum += static_cast<double>(r.*field);
  m.mean = sum / n;
  if (rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : rows) {
      const double dev = static_cast<double>(r.*field) - m.mean;
      ss += dev * dev;
    }
    m.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return m;
}

inline void freq_stats(const std::vector<TrialSummary>& rows, bool TrialSummary::* field,
                       double& rate, double& se) {
  const auto n = static_cast<double>(rows.size());
  std::int64_t hits = 0;
  for (const auto& r : rows)
    if (r.*field) ++hits;
  rate = n > 0 ? static_cast<double>(hits) / n : 0.0;
  se = n > 0 ? std::sqrt(rate * (1.0 - rate) / n) : 0.0;
}

}  // namespace detail

inline SimulationReport simulate(const ElectionConfig& config, const MalwareStrategy& strategy,
                                 const OfficialPolicy& policy, std::int64_t trials,
                                 std::uint64_t master_seed, const TrialOptions& opts = {},
                                 int threads = 0) {
  if (trials < 1) throw invalid_parameter("simulate: trials must be >= 1");
  validate(policy);

  const TrialEngine engine(config, strategy);
  VoterBehaviorModel model = config.behavior_model();
  model.validate();

  const AuditScript* fixed_plan = nullptr;
  if (const auto* s = std::get_if<StaticPolicy>(&policy); s && s->fixed_script)
    fixed_plan = &*s->fixed_script;
  if (const auto* a = std::get_if<AdaptivePolicy>(&policy); a && a->fixed_script)
    fixed_plan = &*a->fixed_script;
  if (fixed_plan) validate_plan(config, *fixed_plan);
  const std::int64_t n_audits = base_audit_count(policy);
  const detail::ScriptGenContext gen_ctx(config);

  std::vector<detail::TrialSummary> summaries(static_cast<std::size_t>(trials));
  struct TrialError {
    std::int64_t index = -1;
    std::string message;
  };

  auto run_range = [&](std::int64_t lo, std::int64_t hi, TrialError& err) {
    for (std::int64_t i = lo; i < hi; ++i) {
      try {
        const std::uint64_t trial_seed = derive_seed(master_seed, static_cast<std::uint64_t>(i) + 1);
        AuditScript generated;
        const AuditScript* plan = fixed_plan;
        if (!plan) {
          generated = detail::generate_script_prevalidated(model, config, gen_ctx, n_audits,
                                                           derive_seed(trial_seed, 101));
          plan = &generated;
        }
        const TrialOutcome outcome =
            engine.run(*plan, derive_seed(trial_seed, 202), opts, &policy, &model);

        auto& s = summaries[static_cast<std::size_t>(i)];
        s.caught = outcome.audit_catches > 0;
        s.emergency = outcome.emergency;
        s.alarm = outcome.final_alarms.global_alarm;
        s.audits = outcome.audits_run;
        s.attempts = outcome.tamper_attempts;
        s.tampered_cast = outcome.tampered_cast;
        s.spoils = outcome.spoil_events;
        s.cast = outcome.cast;
        s.abandoned = outcome.abandoned;
        s.bc_cast = outcome.barcode_mismatch_cast;
        s.shifts.reserve(config.contests.size());
        for (const auto& c : config.contests) s.shifts.push_back(margin_report(outcome, c.id).shift);
      } catch (const std::exception& e) {
        if (err.index < 0 || i < err.index) err = {i, e.what()};
        return;
      }
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (n_threads > 16) n_threads = 16;
  if (static_cast<std::int64_t>(n_threads) > trials) n_threads = static_cast<int>(trials);

  std::vector<TrialError> errors(static_cast<std::size_t>(n_threads));
  if (n_threads == 1) {
    run_range(0, trials, errors[0]);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (trials + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const std::int64_t lo = t * chunk;
      const std::int64_t hi = std::min<std::int64_t>(trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi, t] { run_range(lo, hi, errors[static_cast<std::size_t>(t)]); });
    }
    for (auto& th : pool) th.join();
  }
  const TrialError* first_error = nullptr;
  for (const auto& e : errors)
    if (e.index >= 0 && (!first_error || e.index < first_error->index)) first_error = &e;
  if (first_error)
    throw config_error("trial " + std::to_string(first_error->index) + ": " + first_error->message);

  SimulationReport report;
  report.trials = trials;
  report.master_seed = master_seed;
  report.strategy = strategy_name(strategy);
  report.detail = opts.detail == TrialOptions::Detail::PerVoter ? "per_voter" : "aggregate";
  report.base_audits = n_audits;
  detail::freq_stats(summaries, &detail::TrialSummary::caught, report.detection_rate,
                     report.detection_se);
  detail::freq_stats(summaries, &detail::TrialSummary::emergency, report.emergency_rate,
                     report.emergency_se);
  detail::freq_stats(summaries, &detail::TrialSummary::alarm, report.alarm_rate, report.alarm_se);
  report.audits_run = detail::column_stats(summaries, &detail::TrialSummary::audits);
  report.tamper_attempts = detail::column_stats(summaries, &detail::TrialSummary::attempts);
  report.tampered_cast = detail::column_stats(summaries, &detail::TrialSummary::tampered_cast);
  report.spoils = detail::column_stats(summaries, &detail::TrialSummary::spoils);
  report.cast = detail::column_stats(summaries, &detail::TrialSummary::cast);
  report.abandoned = detail::column_stats(summaries, &detail::TrialSummary::abandoned);
  report.barcode_mismatch_cast = detail::column_stats(summaries, &detail::TrialSummary::bc_cast);

  for (std::size_t ci = 0; ci < config.contests.size(); ++ci) {
    MetricStats m;
    const auto n = static_cast<double>(trials);
    double sum = 0.0;
    for (const auto& s : summaries) sum += static_cast<double>(s.shifts[ci]);
    m.mean = sum / n;
    if (trials > 1) {
      double ss = 0.0;
      for (const auto& s : summaries) {
        const double dev = static_cast<double>(s.shifts[ci]) - m.mean;
        ss += dev * dev;
      }
      m.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    report.margin_shift_votes[config.contests[ci].id] = m;
  }
  return report;
}

}  // namespace bmda
