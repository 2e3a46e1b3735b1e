#pragma once

// Exact discrete-distribution machinery shared by the statistics layer and
// the trial engine: a numerically stable Poisson quantile and inverse-CDF
// samplers for binomial / multinomial / hypergeometric counts. All routines
// work with pmf recurrences whose first term is computed in log space, so
// means in the millions neither overflow nor underflow.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bmda/errors.hpp"
#include "bmda/rng.hpp"

namespace bmda {

// Largest Poisson mean the quantile routine accepts. Above this the walk
// lengths (O(sqrt(mu))) and the lgamma conditioning stop being worth exactness.
inline constexpr double kPoissonMuLimit = 1e7;

namespace detail {

// Relative truncation for lower-tail accumulation; terms this small cannot
// move a double sum.
inline constexpr double kTailEps = 1e-18;

}  // namespace detail

// Smallest integer k with PoissonCDF(k; mu) >= q.
//
// For small mu the CDF is accumulated forward from k=0. For large mu the
// recurrence starts at the mode, whose pmf is computed from logs
// (-mu + m*log(mu) - lgamma(m+1)); forward accumulation from zero would
// underflow for mu beyond ~745.
inline std::int64_t poisson_quantile(double q, double mu) {
  if (!(q > 0.0 && q < 1.0)) throw invalid_parameter("poisson_quantile: q must be in (0,1)");
  if (!(mu > 0.0)) throw invalid_parameter("poisson_quantile: mu must be positive");
  if (mu > kPoissonMuLimit) throw invalid_parameter("poisson_quantile: mu exceeds supported limit 1e7");

  if (mu <= 700.0) {
    double pmf = std::exp(-mu);
    double cdf = pmf;
    std::int64_t k = 0;
    const std::int64_t kmax = static_cast<std::int64_t>(mu + 60.0 * std::sqrt(mu) + 60.0);
    while (cdf < q && k < kmax) {
      ++k;
      pmf *= mu / static_cast<double>(k);
      cdf += pmf;
    }
    return k;
  }

  const auto m = static_cast<std::int64_t>(mu);  // pmf mode (floor of mu)
  const double pm =
      std::exp(-mu + static_cast<double>(m) * std::log(mu) - std::lgamma(static_cast<double>(m) + 1.0));

  // Lower-tail CDF at the mode via the downward recurrence pmf(i-1) = pmf(i)*i/mu.
  double cdf_m = pm;
  {
    double t = pm;
    for (std::int64_t i = m; i >= 1; --i) {
      t *= static_cast<double>(i) / mu;
      cdf_m += t;
      if (t < cdf_m * detail::kTailEps) break;
    }
  }

  if (q <= cdf_m) {
    // Walk down while the predecessor still covers q.
    double f = cdf_m;
    double pk = pm;
    std::int64_t k = m;
    while (k > 0 && f - pk >= q) {
      f -= pk;
      pk *= static_cast<double>(k) / mu;
      --k;
    }
    return k;
  }

  // Walk up accumulating pmf(k+1) = pmf(k)*mu/(k+1).
  double f = cdf_m;
  double pk = pm;
  std::int64_t k = m;
  const std::int64_t kmax = m + static_cast<std::int64_t>(40.0 * std::sqrt(mu)) + 60;
  while (f < q && k < kmax) {
    pk *= mu / static_cast<double>(k + 1);
    ++k;
    f += pk;
  }
  return k;
}

// Exact Binomial(n, p) sample by inverse transform on one uniform draw.
inline std::uint64_t binomial_sample(Rng& rng, std::uint64_t n, double p) {
  if (p < 0.0 || p > 1.0 || std::isnan(p)) throw invalid_parameter("binomial_sample: p must be in [0,1]");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial_sample(rng, n, 1.0 - p);

  const double nd = static_cast<double>(n);
  const double u = rng.uniform();
  const double odds = p / (1.0 - p);

  if (nd * p <= 30.0) {
    // Forward accumulation from zero; pmf(0) = (1-p)^n stays representable
    // because the mean is small.
    double pmf = std::exp(nd * std::log1p(-p));
    double cdf = pmf;
    std::uint64_t k = 0;
    while (u >= cdf && k < n) {
      ++k;
      pmf *= odds * (nd - static_cast<double>(k) + 1.0) / static_cast<double>(k);
      cdf += pmf;
      if (pmf < 1e-300 && u >= cdf) return k;  // tail exhausted within fp
    }
    return k;
  }

  const auto m = static_cast<std::uint64_t>((nd + 1.0) * p);  // mode
  const double md = static_cast<double>(m);
  const double pm = std::exp(std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(nd - md + 1.0) +
                             md * std::log(p) + (nd - md) * std::log1p(-p));

  double cdf_m = pm;
  {
    double t = pm;
    for (std::uint64_t i = m; i >= 1; --i) {
      const double id = static_cast<double>(i);
      t *= id / (odds * (nd - id + 1.0));
      cdf_m += t;
      if (t < cdf_m * detail::kTailEps) break;
    }
  }

  if (u <= cdf_m) {
    double f = cdf_m;
    double pk = pm;
    std::uint64_t k = m;
    while (k > 0 && f - pk >= u) {
      f -= pk;
      const double kd = static_cast<double>(k);
      pk *= kd / (odds * (nd - kd + 1.0));
      --k;
    }
    return k;
  }

  double f = cdf_m;
  double pk = pm;
  std::uint64_t k = m;
  while (f < u && k < n) {
    const double kd = static_cast<double>(k);
    pk *= odds * (nd - kd) / (kd + 1.0);
    ++k;
    f += pk;
    if (pk < 1e-300) break;
  }
  return k;
}

// Multinomial(n, weights) by chained conditional binomials. Weights need not
// be normalized; order of cells is preserved (determinism contract).
inline std::vector<std::uint64_t> multinomial_sample(Rng& rng, std::uint64_t n,
                                                     std::span<const double> weights) {
  std::vector<std::uint64_t> out(weights.size(), 0);
  if (weights.empty()) {
    if (n > 0) throw invalid_parameter("multinomial_sample: no cells for positive count");
    return out;
  }
  double wrem = 0.0;
  for (double w : weights) {
    if (w < 0.0 || std::isnan(w)) throw invalid_parameter("multinomial_sample: negative weight");
    wrem += w;
  }
  std::uint64_t rem = n;
  for (std::size_t i = 0; i + 1 < weights.size() && rem > 0; ++i) {
    if (wrem <= 0.0) break;
    const double frac = weights[i] / wrem;
    out[i] = binomial_sample(rng, rem, frac < 1.0 ? frac : 1.0);
    rem -= out[i];
    wrem -= weights[i];
  }
  out.back() += rem;
  return out;
}

// Exact Hypergeometric sample: number of marked items among `draws` taken
// without replacement from a population of `total` containing `marked`.
inline std::uint64_t hypergeometric_sample(Rng& rng, std::uint64_t total, std::uint64_t marked,
                                           std::uint64_t draws) {
  if (marked > total || draws > total)
    throw invalid_parameter("hypergeometric_sample: marked and draws must be <= total");
  if (draws == 0 || marked == 0) return 0;
  if (marked == total) return draws;

  const double N = static_cast<double>(total);
  const double K = static_cast<double>(marked);
  const double nn = static_cast<double>(draws);
  const std::uint64_t klo =
      draws + marked > total ? draws + marked - total : 0;
  const std::uint64_t khi = marked < draws ? marked : draws;

  auto log_pmf = [&](std::uint64_t k) {
    const double kd = static_cast<double>(k);
    return std::lgamma(K + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(K - kd + 1.0) +
           std::lgamma(N - K + 1.0) - std::lgamma(nn - kd + 1.0) - std::lgamma(N - K - nn + kd + 1.0) +
           std::lgamma(nn + 1.0) + std::lgamma(N - nn + 1.0) - std::lgamma(N + 1.0);
  };
  // pmf(k+1)/pmf(k)
  auto up_ratio = [&](std::uint64_t k) {
    const double kd = static_cast<double>(k);
    return (K - kd) * (nn - kd) / ((kd + 1.0) * (N - K - nn + kd + 1.0));
  };

  std::uint64_t m = static_cast<std::uint64_t>((nn + 1.0) * (K + 1.0) / (N + 2.0));
  if (m < klo) m = klo;
  if (m > khi) m = khi;
  const double pm = std::exp(log_pmf(m));

  double cdf_m = pm;
  {
    double t = pm;
    for (std::uint64_t i = m; i > klo; --i) {
      t /= up_ratio(i - 1);
      cdf_m += t;
      if (t < cdf_m * detail::kTailEps) break;
    }
  }

  const double u = rng.uniform();
  if (u <= cdf_m) {
    double f = cdf_m;
    double pk = pm;
    std::uint64_t k = m;
    while (k > klo && f - pk >= u) {
      f -= pk;
      pk /= up_ratio(k - 1);
      --k;
    }
    return k;
  }
  double f = cdf_m;
  double pk = pm;
  std::uint64_t k = m;
  while (f < u && k < khi) {
    pk *= up_ratio(k);
    ++k;
    f += pk;
    if (pk < 1e-300) break;
  }
  return k;
}

}  // namespace bmda
