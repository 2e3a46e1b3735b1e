#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "bmda/discrete.hpp"
#include "bmda/rng.hpp"

using namespace bmda;

namespace {

// Independent CDF oracle: each term from logs, no recurrences shared with the
// implementation.
double poisson_cdf_brute(std::int64_t k, double mu) {
  double cdf = 0.0;
  for (std::int64_t i = 0; i <= k; ++i)
    cdf += std::exp(-mu + static_cast<double>(i) * std::log(mu) - std::lgamma(static_cast<double>(i) + 1.0));
  return cdf;
}

double binom_pmf(std::int64_t k, std::int64_t n, double p) {
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(n - k) + 1.0) + static_cast<double>(k) * std::log(p) +
                  static_cast<double>(n - k) * std::log1p(-p));
}

}  // namespace

TEST_CASE("poisson_quantile examples") {
  CHECK(poisson_quantile(0.95, 2000.0) == 2074);
  CHECK(poisson_quantile(0.95, 90.0) == 106);
  CHECK(poisson_quantile(0.5, 1e-9) == 0);
  CHECK(poisson_quantile(0.95, 12000.0) == 12180);
  CHECK_THROWS_AS(poisson_quantile(0.0, 10.0), invalid_parameter);
  CHECK_THROWS_AS(poisson_quantile(1.0, 10.0), invalid_parameter);
  CHECK_THROWS_AS(poisson_quantile(0.5, 0.0), invalid_parameter);
  CHECK_THROWS_AS(poisson_quantile(0.5, 2e7), invalid_parameter);
}

TEST_CASE("poisson_quantile satisfies CDF(k-1) < q <= CDF(k) for 500 random cases") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double q = 0.001 + 0.998 * rng.uniform();
    const double mu = 0.01 + 4999.99 * rng.uniform();
    const std::int64_t k = poisson_quantile(q, mu);
    INFO("q=" << q << " mu=" << mu << " k=" << k);
    CHECK(poisson_cdf_brute(k, mu) >= q - 1e-12);
    if (k > 0) CHECK(poisson_cdf_brute(k - 1, mu) < q + 1e-12);
  }
}

TEST_CASE("poisson_quantile stays near the one-sided normal approximation") {
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    const double mu = 100.0 + 19900.0 * rng.uniform();
    const std::int64_t k = poisson_quantile(0.95, mu);
    const auto normal = static_cast<std::int64_t>(std::llround(mu + 1.645 * std::sqrt(mu)));
    INFO("mu=" << mu);
    CHECK(std::llabs(k - normal) <= 2);
  }
  CHECK(std::llabs(poisson_quantile(0.95, 100.0) -
                   static_cast<std::int64_t>(std::llround(100.0 + 1.645 * 10.0))) <= 2);
  CHECK(std::llabs(poisson_quantile(0.95, 20000.0) -
                   static_cast<std::int64_t>(std::llround(20000.0 + 1.645 * std::sqrt(20000.0)))) <= 2);
}

TEST_CASE("binomial_sample matches the exact pmf on a small case") {
  Rng rng(13);
  const std::int64_t n = 12;
  const double p = 0.3;
  const int draws = 200000;
  std::map<std::uint64_t, int> counts;
  for (int i = 0; i < draws; ++i) ++counts[binomial_sample(rng, n, p)];
  for (std::int64_t k = 0; k <= n; ++k) {
    const double expect = binom_pmf(k, n, p);
    const double freq = static_cast<double>(counts[static_cast<std::uint64_t>(k)]) / draws;
    const double tol = 4.5 * std::sqrt(expect * (1.0 - expect) / draws) + 1e-9;
    INFO("k=" << k);
    CHECK(std::fabs(freq - expect) <= tol);
  }
}

TEST_CASE("binomial_sample first and second moments at scale") {
  Rng rng(14);
  const std::uint64_t n = 2000000;
  const double p = 0.01;
  const int draws = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = static_cast<double>(binomial_sample(rng, n, p));
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  const double true_mean = static_cast<double>(n) * p;
  const double true_var = true_mean * (1.0 - p);
  CHECK(std::fabs(mean - true_mean) <= 4.5 * std::sqrt(true_var / draws));
  CHECK(std::fabs(var - true_var) <= 0.05 * true_var);
}

TEST_CASE("binomial_sample edges") {
  Rng rng(15);
  CHECK(binomial_sample(rng, 100, 0.0) == 0);
  CHECK(binomial_sample(rng, 100, 1.0) == 100);
  CHECK(binomial_sample(rng, 0, 0.5) == 0);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = binomial_sample(rng, 50, 0.9);  // symmetric path
    CHECK(x <= 50);
  }
  CHECK_THROWS_AS(binomial_sample(rng, 10, -0.1), invalid_parameter);
  CHECK_THROWS_AS(binomial_sample(rng, 10, 1.5), invalid_parameter);
}

TEST_CASE("multinomial_sample preserves totals and proportions") {
  Rng rng(16);
  const std::vector<double> w{0.5, 0.3, 0.2};
  double sums[3] = {0, 0, 0};
  const int draws = 5000;
  const std::uint64_t n = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto counts = multinomial_sample(rng, n, w);
    REQUIRE(counts.size() == 3);
    CHECK(counts[0] + counts[1] + counts[2] == n);
    for (int j = 0; j < 3; ++j) sums[j] += static_cast<double>(counts[j]);
  }
  for (int j = 0; j < 3; ++j) {
    const double mean = sums[j] / draws / static_cast<double>(n);
    CHECK(std::fabs(mean - w[j]) <= 4.5 * std::sqrt(w[j] * (1 - w[j]) / (draws * static_cast<double>(n))));
  }
  // unnormalized weights behave identically
  const auto a = multinomial_sample(rng, 100, std::vector<double>{2.0, 2.0});
  CHECK(a[0] + a[1] == 100);
}

TEST_CASE("hypergeometric_sample support, mean, and exact small case") {
  Rng rng(17);
  // support bounds
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t k = hypergeometric_sample(rng, 50, 30, 40);
    CHECK(k >= 20);  // draws + marked - total
    CHECK(k <= 30);
  }
  // mean over many draws
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += static_cast<double>(hypergeometric_sample(rng, 10000, 100, 500));
  const double mean = sum / draws;
  const double true_mean = 500.0 * 100.0 / 10000.0;
  const double true_var = true_mean * (1 - 100.0 / 10000.0) * (10000.0 - 500.0) / (10000.0 - 1.0);
  CHECK(std::fabs(mean - true_mean) <= 4.5 * std::sqrt(true_var / draws));
  // exact degenerate cases
  CHECK(hypergeometric_sample(rng, 10, 10, 4) == 4);
  CHECK(hypergeometric_sample(rng, 10, 0, 4) == 0);
  CHECK(hypergeometric_sample(rng, 10, 4, 0) == 0);
  CHECK_THROWS_AS(hypergeometric_sample(rng, 10, 11, 2), invalid_parameter);
}

TEST_CASE("samplers are deterministic given the seed") {
  Rng a(99), b(99);
  for (int i = 0; i < 200; ++i) {
    CHECK(binomial_sample(a, 100000, 0.37) == binomial_sample(b, 100000, 0.37));
    CHECK(hypergeometric_sample(a, 5000, 700, 300) == hypergeometric_sample(b, 5000, 700, 300));
  }
}

TEST_CASE("dice_seed folds rolls base-6, first roll least significant") {
  CHECK(dice_seed(std::vector<int>{1}) == 0);
  CHECK(dice_seed(std::vector<int>{2}) == 1);
  CHECK(dice_seed(std::vector<int>{1, 2}) == 6);       // (2-1)*6^1
  CHECK(dice_seed(std::vector<int>{3, 5, 2}) == 2 + 4 * 6 + 1 * 36);
  CHECK_THROWS_AS(dice_seed(std::vector<int>{}), invalid_parameter);
  CHECK_THROWS_AS(dice_seed(std::vector<int>{7}), invalid_parameter);
  CHECK_THROWS_AS(dice_seed(std::vector<int>{0}), invalid_parameter);
}
