#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bmda/spoilage.hpp"

using namespace bmda;

TEST_CASE("spoilage_threshold examples") {
  const auto t = spoilage_threshold({200000, 0.01, 0.1, 0.95});
  CHECK(t.mean == Catch::Approx(2000.0));
  CHECK(t.threshold == 2074);
  CHECK(t.excess == 74);

  const auto t9 = spoilage_threshold({9000, 0.01, 0.1, 0.95});
  CHECK(t9.threshold == 106);
  CHECK(t9.excess == 16);

  // degenerate: tiny election, the quantile still sits at or above the mean
  const auto td = spoilage_threshold({1, 1e-4, 0.5, 0.95});
  CHECK(td.threshold >= 0);
  CHECK(td.threshold >= std::llround(td.mean));

  CHECK_THROWS_AS(spoilage_threshold({0, 0.01, 0.1, 0.95}), invalid_parameter);
  CHECK_THROWS_AS(spoilage_threshold({1000, 0.0, 0.1, 0.95}), invalid_parameter);
  CHECK_THROWS_AS(spoilage_threshold({1000, 0.01, 0.0, 0.95}), invalid_parameter);
  CHECK_THROWS_AS(spoilage_threshold({1000, 0.01, 0.1, 1.0}), invalid_parameter);
}

TEST_CASE("margin_delta reproduces all nine published cells to 3 decimals") {
  struct Cell {
    double detect;
    std::int64_t ballots;
    double expect;
  };
  const Cell cells[] = {{0.10, 9000, 3.556},   {0.10, 200000, 0.740}, {0.10, 1200000, 0.300},
                        {0.30, 9000, 1.185},   {0.30, 200000, 0.247}, {0.30, 1200000, 0.100},
                        {0.50, 9000, 0.711},   {0.50, 200000, 0.148}, {0.50, 1200000, 0.060}};
  for (const auto& c : cells) {
    const double got = margin_delta({c.ballots, 0.01, c.detect, 0.95});
    INFO("detect=" << c.detect << " ballots=" << c.ballots);
    CHECK(std::fabs(got - c.expect) < 5e-4);
  }
}

TEST_CASE("margin_delta strictly decreases as the election grows") {
  for (double d : {0.1, 0.3, 0.5}) {
    double prev = margin_delta({9000, 0.01, d, 0.95});
    for (std::int64_t size : {200000LL, 1200000LL, 5000000LL}) {
      const double cur = margin_delta({size, 0.01, d, 0.95});
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("undetectable_attack_budget") {
  CHECK(undetectable_attack_budget({200000, 0.01, 0.1, 0.95}) == 740);
  CHECK(undetectable_attack_budget({200000, 0.01, 1.0, 0.95}) == 74);
  CHECK(undetectable_attack_budget({9000, 0.01, 0.5, 0.95}) == 32);
}
