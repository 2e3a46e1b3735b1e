#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bmda/audit_stats.hpp"
#include "bmda/rng.hpp"

using namespace bmda;

namespace {

// Independent oracle: survival as the literal product of per-draw clean
// probabilities, accumulated in log space.
double survival_product(std::int64_t N, std::int64_t T, std::int64_t n) {
  if (n > N - T) return 0.0;
  double log_s = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    log_s += std::log(static_cast<double>(N - i - T)) - std::log(static_cast<double>(N - i));
  return std::exp(log_s);
}

struct TableRow {
  double p;
  int n;
  double pct;
};

// Published detection table (percent, two decimals).
const TableRow kTable1[] = {
    {0.01, 40, 33.10}, {0.01, 80, 55.25},  {0.01, 120, 70.06}, {0.01, 160, 79.97},
    {0.01, 200, 86.60}, {0.01, 240, 91.04}, {0.01, 280, 94.00}, {0.01, 320, 95.99},
    {0.01, 500, 99.34}, {0.05, 10, 40.13},  {0.05, 20, 64.15},  {0.05, 30, 78.54},
    {0.05, 40, 87.15},  {0.05, 50, 92.31},  {0.05, 60, 95.39},  {0.10, 10, 65.13},
    {0.10, 20, 87.84},  {0.10, 30, 95.76},  {0.10, 40, 98.52},  {0.10, 50, 99.48},
    {0.15, 10, 80.31},  {0.15, 20, 96.12},  {0.15, 30, 99.24},  {0.15, 40, 99.85},
    {0.15, 50, 99.97}};

}  // namespace

TEST_CASE("detection_probability reproduces the published table") {
  for (const auto& row : kTable1) {
    const double pct = 100.0 * detection_probability(row.p, row.n);
    INFO("p=" << row.p << " n=" << row.n);
    CHECK(std::fabs(pct - row.pct) <= 0.005);
  }
}

TEST_CASE("detection_probability examples and edge cases") {
  CHECK(detection_probability(0.01, 40) == Catch::Approx(0.3310).margin(5e-5));
  CHECK(detection_probability(0.10, 20) == Catch::Approx(0.8784).margin(5e-5));
  CHECK(detection_probability(0.0, 1000) == 0.0);
  CHECK(detection_probability(0.15, 50) == Catch::Approx(0.9997).margin(5e-5));
  CHECK(detection_probability(1.0, 1) == 1.0);
  CHECK(detection_probability(1.0, 0) == 0.0);
  // tiny rates with huge n must not underflow to 0
  CHECK(detection_probability(1e-9, 1000000) == Catch::Approx(9.995e-4).epsilon(1e-3));
  CHECK_THROWS_AS(detection_probability(-0.1, 10), invalid_parameter);
  CHECK_THROWS_AS(detection_probability(1.1, 10), invalid_parameter);
  CHECK_THROWS_AS(detection_probability(AuditQuery{0.5, -1}), invalid_parameter);
}

TEST_CASE("detection_probability is monotone in p and n, zero iff p=0 or n=0") {
  Rng rng(2024);
  for (int i = 0; i < 400; ++i) {
    const double p = rng.uniform();
    const auto n = static_cast<std::int64_t>(rng.below(600));
    const double base = detection_probability(p, n);
    CHECK(detection_probability(std::min(1.0, p + 0.01), n) >= base);
    CHECK(detection_probability(p, n + 7) >= base);
    if (p > 0.0 && n > 0)
      CHECK(base > 0.0);
    else
      CHECK(base == 0.0);
  }
}

TEST_CASE("audits_needed inverts the detection curve") {
  CHECK(audits_needed(0.01, 0.95) == 299);
  CHECK(audits_needed(0.05, 0.95) == 59);
  CHECK(audits_needed(1.0, 0.99) == 1);
  // exact inversion; 459 first reaches 99% (some published staffing estimates
  // quote 468, which the formula does not reproduce)
  CHECK(audits_needed(0.01, 0.99) == 459);
  CHECK_THROWS_AS(audits_needed(0.0, 0.95), invalid_parameter);
  CHECK_THROWS_AS(audits_needed(0.5, 1.0), invalid_parameter);
}

TEST_CASE("audits_needed minimality holds for 1000 random pairs") {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const double p = 0.001 + 0.6 * rng.uniform();
    const double c = 0.01 + 0.985 * rng.uniform();
    const std::int64_t n = audits_needed(p, c);
    INFO("p=" << p << " c=" << c << " n=" << n);
    REQUIRE(n >= 1);
    CHECK(detection_probability(p, n) >= c);
    if (n > 1) CHECK(detection_probability(p, n - 1) < c);
  }
}

TEST_CASE("oracle_survival matches the without-replacement product") {
  const double s539 = oracle_survival(2800, 14, 539);
  const double s538 = oracle_survival(2800, 14, 538);
  CHECK(s539 <= 0.05);
  CHECK(s538 > 0.05);
  CHECK(oracle_survival(2800, 14, 0) == 1.0);
  CHECK(oracle_survival(2800, 0, 500) == 1.0);
  CHECK(oracle_survival(100, 40, 61) == 0.0);  // audits > N - T

  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto N = static_cast<std::int64_t>(2 + rng.below(9999));
    const auto T = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(N) + 1));
    const auto n = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(N) + 1));
    const double impl = oracle_survival(N, T, n);
    const double brute = survival_product(N, T, n);
    INFO("N=" << N << " T=" << T << " n=" << n);
    if (brute > 0.0)
      CHECK(std::fabs(impl - brute) <= 1e-10 * brute);
    else
      CHECK(impl == 0.0);
  }
}

TEST_CASE("without-replacement detection dominates with-replacement") {
  Rng rng(6);
  for (int i = 0; i < 300; ++i) {
    const auto N = static_cast<std::int64_t>(10 + rng.below(100000));
    const auto T = static_cast<std::int64_t>(1 + rng.below(static_cast<std::uint64_t>(N)));
    const auto n = static_cast<std::int64_t>(1 + rng.below(static_cast<std::uint64_t>(N)));
    const double surv = oracle_survival(N, T, n);
    const double with_repl_surv =
        std::exp(static_cast<double>(n) * std::log1p(-static_cast<double>(T) / static_cast<double>(N)));
    CHECK(surv <= with_repl_surv + 1e-12);
  }
}

TEST_CASE("oracle_survival is nonincreasing in audits and tampered") {
  for (std::int64_t n = 0; n < 600; n += 37)
    CHECK(oracle_survival(2800, 14, n + 1) <= oracle_survival(2800, 14, n));
  for (std::int64_t T = 0; T < 100; T += 7)
    CHECK(oracle_survival(2800, T + 1, 200) <= oracle_survival(2800, T, 200));
}

TEST_CASE("oracle_min_audits") {
  CHECK(oracle_min_audits(2800, 14, 0.05) == 539);
  CHECK(oracle_min_audits(2800, 2800, 0.05) == 1);
  CHECK_THROWS_AS(oracle_min_audits(2800, 0, 0.05), unreachable_limit);
  CHECK_THROWS_AS(oracle_min_audits(2800, 14, 0.0), invalid_parameter);

  // brute-force linear scan with the independent product oracle
  const std::int64_t got = oracle_min_audits(1200000, 2000, 0.60);
  std::int64_t scan = 0;
  while (survival_product(1200000, 2000, scan) > 0.60) ++scan;
  CHECK(got == scan);
  CHECK(got == 307);
}

TEST_CASE("with_replacement_equivalent") {
  CHECK(with_replacement_equivalent({2800, 14, 539}) == Catch::Approx(0.9329).margin(1e-4));
  CHECK(with_replacement_equivalent({2800, 14, 0}) == 0.0);
  CHECK(with_replacement_equivalent({1200000, 2000, 300}) == Catch::Approx(0.3935).margin(5e-4));
  CHECK(with_replacement_equivalent({1200000, 2000, 300}) ==
        Catch::Approx(0.3937222897881819).epsilon(1e-12));
}

TEST_CASE("staffing_plan allocates audits proportionally, mail gets none") {
  const StaffingPlan plan = staffing_plan({500, 0.63, 0.29, 0.08, 52, 14, 52});
  CHECK(plan.per_early_location == Catch::Approx(6.06).margin(0.005));
  CHECK(plan.per_early_location_per_day < 1.0);
  CHECK(plan.per_early_location_per_day == Catch::Approx(0.43).margin(0.005));
  CHECK(plan.per_election_day_team == Catch::Approx(2.79).margin(0.005));
  CHECK(plan.mail_audits == 0.0);

  const StaffingPlan zero = staffing_plan({0, 0.63, 0.29, 0.08, 52, 14, 52});
  CHECK(zero.early_audits == 0.0);
  CHECK(zero.per_election_day_team == 0.0);

  const StaffingPlan even = staffing_plan({1000, 0.5, 0.5, 0.0, 10, 10, 10});
  CHECK(even.per_early_location == Catch::Approx(50.0));
  CHECK(even.per_early_location_per_day == Catch::Approx(5.0));
  CHECK(even.per_election_day_team == Catch::Approx(50.0));

  CHECK_THROWS_AS(staffing_plan({100, 0.5, 0.4, 0.2, 10, 10, 10}), invalid_parameter);
  CHECK_THROWS_AS(staffing_plan({100, 0.5, 0.5, 0.0, 0, 10, 10}), invalid_parameter);
}
