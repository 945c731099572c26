#pragma once
// Test-only oracles and statistics helpers. Nothing here reuses the
// library's sampler algebra.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "flexqr/rng.hpp"

namespace flexqr::testing {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

/// sup |F1 - F2| between two empirical distributions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

/// KS statistic of an ascending sample against CDF values at its points.
inline double ks_one_sample(std::span<const double> cdf_at_sorted) {
  const double n = static_cast<double>(cdf_at_sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < cdf_at_sorted.size(); ++i) {
    const double f = cdf_at_sorted[i];
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
  }
  return d;
}

/// Generic GIG(lambda, chi, psi) by the ratio of uniforms on the
/// standardized variable y = x / sqrt(chi / psi), density proportional to
/// y^{lambda-1} exp(-beta (y + 1/y) / 2) with beta = sqrt(chi psi).
inline double gig_rou(double lambda, double chi, double psi, RngStream& rng) {
  const double beta = std::sqrt(chi * psi);
  const double eta = std::sqrt(chi / psi);
  auto logf = [&](double y) { return (lambda - 1.0) * std::log(y) - 0.5 * beta * (y + 1.0 / y); };
  const double ym = ((lambda - 1.0) + std::sqrt((lambda - 1.0) * (lambda - 1.0) + beta * beta)) / beta;
  const double yp = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + beta * beta)) / beta;
  const double log_umax = 0.5 * logf(ym);
  const double log_vmax = std::log(yp) + 0.5 * logf(yp);
  for (;;) {
    const double u = std::exp(log_umax) * rng.uniform();
    const double v = std::exp(log_vmax) * rng.uniform();
    const double y = v / u;
    if (2.0 * std::log(u) <= logf(y)) return eta * y;
  }
}

/// Pearson chi-square p-value of observed counts against expected counts.
inline double chi2_pvalue(std::span<const double> observed, std::span<const double> expected,
                          int lost_df = 1) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size()) - lost_df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace flexqr::testing
