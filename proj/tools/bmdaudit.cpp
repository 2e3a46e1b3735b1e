// bmdaudit: reproduce the detection/margin tables, size audit programs, run
// Monte Carlo election scenarios, generate dice-seeded audit scripts, and
// monitor spoiled-ballot streams.
//
// Exit codes: 0 success, 2 invalid parameters/config/input, 3 internal error,
// 4 script agreement failure (evidence signal).

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bmda/bmda.hpp"

namespace fs = std::filesystem;
using bmda::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitInternal = 3;
constexpr int kExitDisagreement = 4;

struct Table1Row {
  double p;
  int n;
};

// The standard detection table: cheat rates crossed with audit counts.
const std::vector<Table1Row> kTable1Rows = {
    {0.01, 40}, {0.01, 80}, {0.01, 120}, {0.01, 160}, {0.01, 200}, {0.01, 240}, {0.01, 280},
    {0.01, 320}, {0.01, 500}, {0.05, 10}, {0.05, 20}, {0.05, 30},  {0.05, 40},  {0.05, 50},
    {0.05, 60},  {0.10, 10}, {0.10, 20}, {0.10, 30},  {0.10, 40},  {0.10, 50},  {0.15, 10},
    {0.15, 20},  {0.15, 30}, {0.15, 40}, {0.15, 50}};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<int> parse_dice(const std::string& text) {
  std::vector<int> rolls;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '-') continue;
    if (c < '1' || c > '6') throw bmda::invalid_parameter("dice rolls must be digits 1..6");
    rolls.push_back(c - '0');
  }
  if (rolls.empty()) throw bmda::invalid_parameter("no dice rolls given");
  return rolls;
}

std::string default_out_dir() {
  const char* env = std::getenv("BMDAUDIT_OUT");
  return env && *env ? env : "";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw bmda::data_error("cannot create output directory '" + dir + "'");
}

void write_manifest(bmda::RunManifest& manifest, const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.json").string();
  manifest.outputs.push_back("manifest.json");
  bmda::write_file(path, manifest.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// table-detection

std::string table1_csv(const std::vector<Table1Row>& rows) {
  std::string out = "p,audits,detection_pct\n";
  for (const auto& r : rows)
    out += fmt("%.2f", r.p) + "," + std::to_string(r.n) + "," +
           fmt("%.2f", 100.0 * bmda::detection_probability(r.p, r.n)) + "\n";
  return out;
}

std::string table1_text(const std::vector<Table1Row>& rows) {
  std::string out = "cheat rate    audits    detection\n";
  double last_p = -1.0;
  for (const auto& r : rows) {
    char buf[80];
    const double pct = 100.0 * bmda::detection_probability(r.p, r.n);
    std::snprintf(buf, sizeof buf, "%10s%10d%12s\n", r.p == last_p ? "" : fmt("%.2f", r.p).c_str(), r.n,
                  (fmt("%.2f", pct) + "%").c_str());
    out += buf;
    last_p = r.p;
  }
  return out;
}

int cmd_table_detection(std::optional<double> p, std::optional<std::int64_t> n,
                        const std::string& format, const std::string& out_dir) {
  std::vector<Table1Row> rows;
  if (p || n) {
    if (!p || !n) throw bmda::invalid_parameter("custom row needs both --p and --n");
    rows.push_back({*p, static_cast<int>(*n)});
  } else {
    rows = kTable1Rows;
  }
  const std::string csv = table1_csv(rows);
  const std::string text = table1_text(rows);
  std::fputs(format == "csv" ? csv.c_str() : text.c_str(), stdout);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    bmda::write_file((fs::path(out_dir) / "table_detection.csv").string(), csv);
    bmda::write_file((fs::path(out_dir) / "table_detection.txt").string(), text);
    bmda::RunManifest manifest;
    manifest.command = "table-detection";
    manifest.parameters = json::object();
    if (p) manifest.parameters["p"] = *p;
    if (n) manifest.parameters["n"] = *n;
    manifest.outputs = {"table_detection.csv", "table_detection.txt"};
    write_manifest(manifest, out_dir);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// table-margin

std::string table2_csv(double rate, const std::vector<std::int64_t>& sizes,
                       const std::vector<double>& detects, double confidence) {
  std::string out = "detection_pct,ballots,margin_delta_pct\n";
  for (double d : detects)
    for (std::int64_t size : sizes) {
      const bmda::SpoilageModel m{size, rate, d, confidence};
      out += fmt_short(100.0 * d) + "," + std::to_string(size) + "," +
             fmt("%.3f", bmda::margin_delta(m)) + "\n";
    }
  return out;
}

std::string table2_text(double rate, const std::vector<std::int64_t>& sizes,
                        const std::vector<double>& detects, double confidence) {
  std::string out = "detection%    ballots    margin_delta%\n";
  for (double d : detects) {
    bool first = true;
    for (std::int64_t size : sizes) {
      const bmda::SpoilageModel m{size, rate, d, confidence};
      char buf[96];
      std::snprintf(buf, sizeof buf, "%10s%11lld%17s\n",
                    first ? (fmt_short(100.0 * d) + "%").c_str() : "", static_cast<long long>(size),
                    (fmt("%.3f", bmda::margin_delta(m)) + "%").c_str());
      out += buf;
      first = false;
    }
  }
  return out;
}

int cmd_table_margin(double rate, std::vector<std::int64_t> sizes, std::vector<double> detects,
                     double confidence, const std::string& format, const std::string& out_dir) {
  if (sizes.empty()) sizes = {9000, 200000, 1200000};
  if (detects.empty()) detects = {0.10, 0.30, 0.50};
  const std::string csv = table2_csv(rate, sizes, detects, confidence);
  const std::string text = table2_text(rate, sizes, detects, confidence);
  std::fputs(format == "csv" ? csv.c_str() : text.c_str(), stdout);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    bmda::write_file((fs::path(out_dir) / "table_margin.csv").string(), csv);
    bmda::write_file((fs::path(out_dir) / "table_margin.txt").string(), text);
    bmda::RunManifest manifest;
    manifest.command = "table-margin";
    manifest.parameters = json{{"rate", rate}, {"sizes", sizes}, {"detect", detects},
                               {"confidence", confidence}};
    manifest.outputs = {"table_margin.csv", "table_margin.txt"};
    write_manifest(manifest, out_dir);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// oracle

int cmd_oracle(std::int64_t total, std::int64_t tampered, double alpha, const std::string& format) {
  const std::int64_t n = bmda::oracle_min_audits(total, tampered, alpha);
  const double surv_n = bmda::oracle_survival(total, tampered, n);
  const double surv_prev = n > 0 ? bmda::oracle_survival(total, tampered, n - 1) : 1.0;
  const double with_repl = bmda::with_replacement_equivalent({total, tampered, n});
  if (format == "json") {
    json j{{"total_ballots", total},
           {"tampered", tampered},
           {"risk_limit", alpha},
           {"min_audits", n},
           {"survival_at_n", surv_n},
           {"survival_at_n_minus_1", surv_prev},
           {"with_replacement_detection", with_repl}};
    std::fputs((j.dump(2) + "\n").c_str(), stdout);
  } else {
    std::printf("total ballots (N):  %lld\n", static_cast<long long>(total));
    std::printf("tampered (T):       %lld\n", static_cast<long long>(tampered));
    std::printf("risk limit:         %s\n", fmt("%g", alpha).c_str());
    std::printf("minimum audits (n): %lld\n", static_cast<long long>(n));
    std::printf("survival at n:      %.6f\n", surv_n);
    std::printf("survival at n-1:    %.6f\n", surv_prev);
    std::printf("with-replacement detection at n: %.2f%%\n", 100.0 * with_repl);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// staffing

int cmd_staffing(std::int64_t audits, std::vector<double> shares, std::int64_t locations,
                 std::int64_t days, std::int64_t teams) {
  if (shares.size() != 3)
    throw bmda::invalid_parameter("--shares needs exactly three values: early,election-day,mail");
  const bmda::StaffingPlan plan =
      bmda::staffing_plan({audits, shares[0], shares[1], shares[2], locations, days, teams});
  std::printf("total audits:            %lld\n", static_cast<long long>(audits));
  std::printf("early voting audits:     %.2f\n", plan.early_audits);
  std::printf("election day audits:     %.2f\n", plan.election_day_audits);
  std::printf("mail audits:             %.2f\n", plan.mail_audits);
  std::printf("per early location:      %.2f\n", plan.per_early_location);
  std::printf("per early location/day:  %.2f\n", plan.per_early_location_per_day);
  std::printf("per election-day team:   %.2f\n", plan.per_election_day_team);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

std::string summary_csv(const bmda::SimulationReport& r) {
  std::string out = "metric,mean,se\n";
  auto row = [&](const char* name, double mean, double se) {
    out += std::string(name) + "," + fmt("%.6f", mean) + "," + fmt("%.6f", se) + "\n";
  };
  row("detection_rate", r.detection_rate, r.detection_se);
  row("emergency_rate", r.emergency_rate, r.emergency_se);
  row("global_alarm_rate", r.alarm_rate, r.alarm_se);
  row("audits_run", r.audits_run.mean, r.audits_run.se);
  row("tamper_attempts", r.tamper_attempts.mean, r.tamper_attempts.se);
  row("tampered_cast", r.tampered_cast.mean, r.tampered_cast.se);
  row("spoils", r.spoils.mean, r.spoils.se);
  row("cast", r.cast.mean, r.cast.se);
  row("abandoned", r.abandoned.mean, r.abandoned.se);
  row("barcode_mismatch_cast", r.barcode_mismatch_cast.mean, r.barcode_mismatch_cast.se);
  for (const auto& [contest, m] : r.margin_shift_votes)
    row(("margin_shift_votes." + contest).c_str(), m.mean, m.se);
  return out;
}

std::string summary_text(const bmda::SimulationReport& r) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "trials: %lld   seed: %llu   strategy: %s   detail: %s\n",
                static_cast<long long>(r.trials), static_cast<unsigned long long>(r.master_seed),
                r.strategy.c_str(), r.detail.c_str());
  out += buf;
  auto line = [&](const char* name, double mean, double se) {
    std::snprintf(buf, sizeof buf, "%-28s %14.4f  (se %.4f)\n", name, mean, se);
    out += buf;
  };
  line("detection rate", r.detection_rate, r.detection_se);
  line("emergency rate", r.emergency_rate, r.emergency_se);
  line("global alarm rate", r.alarm_rate, r.alarm_se);
  line("audits run", r.audits_run.mean, r.audits_run.se);
  line("tamper attempts", r.tamper_attempts.mean, r.tamper_attempts.se);
  line("tampered ballots cast", r.tampered_cast.mean, r.tampered_cast.se);
  line("spoil events", r.spoils.mean, r.spoils.se);
  line("ballots cast", r.cast.mean, r.cast.se);
  line("voters abandoned", r.abandoned.mean, r.abandoned.se);
  line("barcode mismatches cast", r.barcode_mismatch_cast.mean, r.barcode_mismatch_cast.se);
  for (const auto& [contest, m] : r.margin_shift_votes)
    line(("margin shift (" + contest + ")").c_str(), m.mean, m.se);
  return out;
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::int64_t> trials_override,
                 std::optional<std::uint64_t> seed_override, const std::vector<int>& dice,
                 const std::string& detail_override, bool want_events, const std::string& out_dir_arg,
                 int threads) {
  const std::string out_dir = out_dir_arg.empty() ? "out" : out_dir_arg;
  const std::string scenario_text = bmda::read_file(scenario_path);
  bmda::Scenario sc = bmda::load_scenario(scenario_text);

  if (!sc.fixed_script_file.empty()) {
    const fs::path resolved = fs::path(scenario_path).parent_path() / sc.fixed_script_file;
    const bmda::AuditScript script =
        bmda::AuditScript::from_json(json::parse(bmda::read_file(resolved.string())));
    if (auto* s = std::get_if<bmda::StaticPolicy>(&sc.policy)) s->fixed_script = script;
    if (auto* a = std::get_if<bmda::AdaptivePolicy>(&sc.policy)) a->fixed_script = script;
  }

  if (trials_override) sc.trials = *trials_override;
  std::uint64_t seed = sc.seed;
  if (!dice.empty()) seed = bmda::dice_seed(dice);
  if (seed_override) seed = *seed_override;
  if (!detail_override.empty())
    sc.options.detail = detail_override == "per_voter" ? bmda::TrialOptions::Detail::PerVoter
                                                       : bmda::TrialOptions::Detail::Aggregate;

  const bmda::SimulationReport report =
      bmda::simulate(sc.config, sc.strategy, sc.policy, sc.trials, seed, sc.options, threads);

  ensure_dir(out_dir);
  const std::string report_json = report.to_json().dump(2) + "\n";
  const std::string csv = summary_csv(report);
  const std::string text = summary_text(report);
  bmda::write_file((fs::path(out_dir) / "report.json").string(), report_json);
  bmda::write_file((fs::path(out_dir) / "summary.csv").string(), csv);
  bmda::write_file((fs::path(out_dir) / "summary.txt").string(), text);

  bmda::RunManifest manifest;
  manifest.command = "simulate";
  manifest.parameters = json{{"scenario", scenario_path},
                             {"trials", sc.trials},
                             {"detail", sc.options.detail == bmda::TrialOptions::Detail::PerVoter
                                            ? "per_voter"
                                            : "aggregate"},
                             {"threads", threads}};
  manifest.seed = seed;
  manifest.dice = dice;
  manifest.add_input(scenario_path);
  manifest.outputs = {"report.json", "summary.csv", "summary.txt"};

  if (want_events || sc.options.log_spoil_events) {
    // Event log of trial 0, derived exactly as the runner derives it.
    bmda::TrialOptions opts = sc.options;
    opts.log_spoil_events = true;
    const bmda::TrialEngine engine(sc.config, sc.strategy);
    bmda::VoterBehaviorModel model = sc.config.behavior_model();
    const std::uint64_t trial_seed = bmda::derive_seed(seed, 1);
    bmda::AuditScript plan;
    const bmda::AuditScript* plan_ptr = nullptr;
    if (const auto* s = std::get_if<bmda::StaticPolicy>(&sc.policy); s && s->fixed_script)
      plan_ptr = &*s->fixed_script;
    if (const auto* a = std::get_if<bmda::AdaptivePolicy>(&sc.policy); a && a->fixed_script)
      plan_ptr = &*a->fixed_script;
    if (!plan_ptr) {
      plan = bmda::generate_script(model, sc.config, bmda::base_audit_count(sc.policy),
                                   bmda::derive_seed(trial_seed, 101));
      plan_ptr = &plan;
    }
    const bmda::TrialOutcome outcome =
        engine.run(*plan_ptr, bmda::derive_seed(trial_seed, 202), opts, &sc.policy, &model);
    std::string events = "timestamp,location_id,machine_id\n";
    for (const auto& e : outcome.spoil_log)
      events += bmda::format_iso8601(e.timestamp) + "," + e.location_id + "," + e.machine_id + "\n";
    bmda::write_file((fs::path(out_dir) / "events.csv").string(), events);
    manifest.outputs.push_back("events.csv");
  }

  write_manifest(manifest, out_dir);
  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// script

int cmd_script(const std::string& scenario_path, const std::string& history_path,
               const std::string& timing_path, std::int64_t audits,
               std::optional<std::uint64_t> seed_opt, const std::vector<int>& dice,
               const std::string& out_file, const std::string& out_dir_arg,
               const std::vector<std::string>& verify_paths) {
  if (!verify_paths.empty()) {
    if (verify_paths.size() < 2) throw bmda::invalid_parameter("--verify needs at least two script files");
    std::vector<bmda::AuditScript> scripts;
    for (const auto& path : verify_paths)
      scripts.push_back(bmda::AuditScript::from_json(json::parse(bmda::read_file(path))));
    if (bmda::verify_agreement(scripts)) {
      std::printf("AGREE: %zu scripts are identical (digest %s)\n", scripts.size(),
                  scripts.front().digest().c_str());
      return kExitOk;
    }
    std::printf("DISAGREE: scripts differ; treat as evidence of a compromised generator\n");
    for (std::size_t i = 0; i < scripts.size(); ++i)
      std::printf("  %s  digest %s\n", verify_paths[i].c_str(), scripts[i].digest().c_str());
    return kExitDisagreement;
  }

  if (scenario_path.empty()) throw bmda::invalid_parameter("--config scenario file required");
  if (!seed_opt && dice.empty())
    throw bmda::invalid_parameter("script generation needs --seed or --dice");
  const std::uint64_t seed = seed_opt ? *seed_opt : bmda::dice_seed(dice);

  const bmda::Scenario sc = bmda::load_scenario(bmda::read_file(scenario_path));
  bmda::VoterBehaviorModel model;
  if (!history_path.empty()) {
    const auto history = bmda::parse_history_csv(bmda::read_file(history_path));
    std::vector<bmda::TimingRecord> timing;
    if (!timing_path.empty()) timing = bmda::parse_timing_csv(bmda::read_file(timing_path));
    model = bmda::fit_model(history, timing);
  } else {
    model = sc.config.behavior_model();
  }

  const bmda::AuditScript script = bmda::generate_script(model, sc.config, audits, seed);

  const std::string out_dir = out_dir_arg.empty() ? "." : out_dir_arg;
  ensure_dir(out_dir);
  const std::string path =
      out_file.empty() ? (fs::path(out_dir) / "script.json").string() : out_file;
  bmda::write_file(path, script.canonical_json() + "\n");

  bmda::RunManifest manifest;
  manifest.command = "script";
  manifest.parameters = json{{"config", scenario_path}, {"audits", audits},
                             {"model_digest", script.model_digest}};
  if (!history_path.empty()) manifest.parameters["history"] = history_path;
  if (!timing_path.empty()) manifest.parameters["timing"] = timing_path;
  manifest.seed = seed;
  manifest.dice = dice;
  manifest.add_input(scenario_path);
  if (!history_path.empty()) manifest.add_input(history_path);
  if (!timing_path.empty()) manifest.add_input(timing_path);
  manifest.outputs = {path};
  write_manifest(manifest, out_dir);

  std::printf("wrote %s (%zu entries, digest %s)\n", path.c_str(), script.entries.size(),
              script.digest().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// monitor

int cmd_monitor(const std::string& events_path, const std::string& cast_path, double rate,
                double confidence, const std::string& format) {
  const auto spoils = bmda::parse_spoil_events(bmda::read_file(events_path));
  std::vector<bmda::CastUpdate> casts;
  if (!cast_path.empty()) casts = bmda::parse_cast_updates(bmda::read_file(cast_path));

  bmda::SpoilMonitor monitor(rate, confidence);
  json transitions(json::value_t::array);
  std::string text;

  bmda::AlarmState previous;
  auto emit = [&](const bmda::AlarmState& now, std::int64_t ts) {
    if (now.global_alarm != previous.global_alarm) {
      json t{{"timestamp", bmda::format_iso8601(ts)},
             {"scope", "global"},
             {"alarm", now.global_alarm},
             {"count", monitor.total_spoils()},
             {"threshold", monitor.global_threshold()}};
      transitions.push_back(t);
      text += std::string(now.global_alarm ? "ALARM" : "CLEAR") + " global at " +
              bmda::format_iso8601(ts) + " count=" + std::to_string(monitor.total_spoils()) +
              " threshold=" + std::to_string(monitor.global_threshold()) + "\n";
    }
    for (const auto& location : now.location_alarms) {
      if (std::find(previous.location_alarms.begin(), previous.location_alarms.end(), location) ==
          previous.location_alarms.end()) {
        json t{{"timestamp", bmda::format_iso8601(ts)},
               {"scope", location},
               {"alarm", true},
               {"count", monitor.location_spoils(location)},
               {"threshold", monitor.location_threshold(location)}};
        transitions.push_back(t);
        text += "ALARM location=" + location + " at " + bmda::format_iso8601(ts) +
                " count=" + std::to_string(monitor.location_spoils(location)) +
                " threshold=" + std::to_string(monitor.location_threshold(location)) + "\n";
      }
    }
    for (const auto& location : previous.location_alarms) {
      if (std::find(now.location_alarms.begin(), now.location_alarms.end(), location) ==
          now.location_alarms.end()) {
        json t{{"timestamp", bmda::format_iso8601(ts)},
               {"scope", location},
               {"alarm", false},
               {"count", monitor.location_spoils(location)},
               {"threshold", monitor.location_threshold(location)}};
        transitions.push_back(t);
        text += "CLEAR location=" + location + " at " + bmda::format_iso8601(ts) + "\n";
      }
    }
    previous = now;
  };

  // Merge the two streams by timestamp; cast updates apply first on ties so a
  // spoil is always judged against the freshest denominator.
  std::size_t si = 0, ci = 0;
  while (si < spoils.size() || ci < casts.size()) {
    const bool take_cast =
        ci < casts.size() && (si >= spoils.size() || casts[ci].timestamp <= spoils[si].timestamp);
    if (take_cast) {
      emit(monitor.ingest_cast(casts[ci]), casts[ci].timestamp);
      ++ci;
    } else {
      emit(monitor.ingest(spoils[si]), spoils[si].timestamp);
      ++si;
    }
  }

  const bmda::AlarmState final_state = monitor.state();
  json summary{{"total_spoils", monitor.total_spoils()},
               {"total_cast", monitor.total_cast()},
               {"global_threshold", monitor.global_threshold()},
               {"global_alarm", final_state.global_alarm},
               {"location_alarms", final_state.location_alarms}};
  if (format == "json") {
    json j{{"transitions", transitions}, {"summary", summary}};
    std::fputs((j.dump(2) + "\n").c_str(), stdout);
  } else {
    std::fputs(text.c_str(), stdout);
    std::printf("summary: spoils=%lld cast=%lld threshold=%lld global_alarm=%s location_alarms=%zu\n",
                static_cast<long long>(monitor.total_spoils()),
                static_cast<long long>(monitor.total_cast()),
                static_cast<long long>(monitor.global_threshold()),
                final_state.global_alarm ? "on" : "off", final_state.location_alarms.size());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BMD fleet audit statistics and election simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bmda::kVersion);

  // table-detection
  auto* td = app.add_subcommand("table-detection", "detection probability table (cheat rate x audits)");
  std::optional<double> td_p;
  std::optional<std::int64_t> td_n;
  std::string td_format = "text", td_out = default_out_dir();
  td->add_option("--p", td_p, "custom row: cheat rate in [0,1]");
  td->add_option("--n", td_n, "custom row: number of audits");
  td->add_option("--format", td_format, "csv|text")->check(CLI::IsMember({"csv", "text"}));
  td->add_option("--out", td_out, "output directory (also via BMDAUDIT_OUT)");

  // table-margin
  auto* tm = app.add_subcommand("table-margin", "undetectable margin movement table");
  double tm_rate = 0.01, tm_conf = 0.95;
  std::vector<std::int64_t> tm_sizes;
  std::vector<double> tm_detects;
  std::string tm_format = "text", tm_out = default_out_dir();
  tm->add_option("--rate", tm_rate, "background spoil rate (default 0.01)");
  tm->add_option("--sizes", tm_sizes, "ballot counts")->delimiter(',');
  tm->add_option("--detect", tm_detects, "voter detection fractions")->delimiter(',');
  tm->add_option("--confidence", tm_conf, "confidence level (default 0.95)");
  tm->add_option("--format", tm_format, "csv|text")->check(CLI::IsMember({"csv", "text"}));
  tm->add_option("--out", tm_out, "output directory");

  // oracle
  auto* orc = app.add_subcommand("oracle", "without-replacement oracle bound");
  std::int64_t orc_total = 0, orc_tampered = 0;
  double orc_alpha = 0.05;
  std::string orc_format = "text";
  orc->add_option("--total", orc_total, "total ballots N")->required();
  orc->add_option("--tampered", orc_tampered, "tampered ballots T")->required();
  orc->add_option("--alpha", orc_alpha, "risk limit (default 0.05)");
  orc->add_option("--format", orc_format, "text|json")->check(CLI::IsMember({"text", "json"}));

  // staffing
  auto* st = app.add_subcommand("staffing", "allocate audits across phases and teams");
  std::int64_t st_audits = 0, st_locations = 0, st_days = 0, st_teams = 0;
  std::vector<double> st_shares;
  st->add_option("--audits", st_audits, "total audits")->required();
  st->add_option("--shares", st_shares, "early,election-day,mail vote shares")->delimiter(',')->required();
  st->add_option("--locations", st_locations, "early voting locations")->required();
  st->add_option("--days", st_days, "early voting days")->required();
  st->add_option("--teams", st_teams, "election day audit teams")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo scenario");
  std::string sim_scenario, sim_out = default_out_dir(), sim_detail, sim_dice;
  std::optional<std::int64_t> sim_trials;
  std::optional<std::uint64_t> sim_seed;
  bool sim_events = false;
  int sim_threads = 0;
  sim->add_option("scenario", sim_scenario, "scenario JSON file")->required();
  sim->add_option("--trials", sim_trials, "override trial count");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--dice", sim_dice, "die rolls (digits 1..6) folded into the seed");
  sim->add_option("--detail", sim_detail, "aggregate|per_voter")
      ->check(CLI::IsMember({"aggregate", "per_voter"}));
  sim->add_option("--out", sim_out, "output directory (default 'out')");
  sim->add_option("--threads", sim_threads, "worker threads (0 = auto)");
  sim->add_flag("--events", sim_events, "also write trial 0's spoil event log");

  // script
  auto* scr = app.add_subcommand("script", "generate or verify audit scripts");
  std::string scr_config, scr_history, scr_timing, scr_out_file, scr_out = default_out_dir(), scr_dice;
  std::int64_t scr_audits = 0;
  std::optional<std::uint64_t> scr_seed;
  std::vector<std::string> scr_verify;
  scr->add_option("--config", scr_config, "scenario JSON with the election world");
  scr->add_option("--history", scr_history, "historical ballots CSV (precinct,contest,choice,count)");
  scr->add_option("--timing", scr_timing, "event-log timing CSV (machine,session_start,session_end)");
  scr->add_option("--audits", scr_audits, "number of audit entries");
  scr->add_option("--seed", scr_seed, "generator seed");
  scr->add_option("--dice", scr_dice, "die rolls (digits 1..6)");
  scr->add_option("--out-file", scr_out_file, "script output path");
  scr->add_option("--out", scr_out, "output directory for script + manifest");
  scr->add_option("--verify", scr_verify, "script files that must be byte-identical")->expected(-2);

  // monitor
  auto* mon = app.add_subcommand("monitor", "stream spoil events against Poisson thresholds");
  std::string mon_events, mon_cast, mon_format = "text";
  double mon_rate = 0.01, mon_conf = 0.95;
  mon->add_option("--events", mon_events, "spoil events CSV (timestamp,location_id,machine_id)")
      ->required();
  mon->add_option("--cast", mon_cast, "cast-count feed CSV (timestamp,location_id,cast_total)");
  mon->add_option("--rate", mon_rate, "expected background spoil rate")->required();
  mon->add_option("--confidence", mon_conf, "confidence level (default 0.95)");
  mon->add_option("--format", mon_format, "text|json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (td->parsed()) return cmd_table_detection(td_p, td_n, td_format, td_out);
    if (tm->parsed()) return cmd_table_margin(tm_rate, tm_sizes, tm_detects, tm_conf, tm_format, tm_out);
    if (orc->parsed()) return cmd_oracle(orc_total, orc_tampered, orc_alpha, orc_format);
    if (st->parsed()) return cmd_staffing(st_audits, st_shares, st_locations, st_days, st_teams);
    if (sim->parsed())
      return cmd_simulate(sim_scenario, sim_trials, sim_seed,
                          sim_dice.empty() ? std::vector<int>{} : parse_dice(sim_dice), sim_detail,
                          sim_events, sim_out, sim_threads);
    if (scr->parsed())
      return cmd_script(scr_config, scr_history, scr_timing, scr_audits, scr_seed,
                        scr_dice.empty() ? std::vector<int>{} : parse_dice(scr_dice), scr_out_file,
                        scr_out, scr_verify);
    if (mon->parsed()) return cmd_monitor(mon_events, mon_cast, mon_rate, mon_conf, mon_format);
  } catch (const bmda::invalid_parameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const bmda::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const bmda::data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const bmda::out_of_order_event& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const bmda::unreachable_limit& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const bmda::schedule_exhausted& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitOk;
}
