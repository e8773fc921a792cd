#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "levylab/curve.hpp"
#include "levylab/errors.hpp"

namespace levylab {

/// P(max_{s in [0,1]} |B(s)| <= a) for standard Brownian motion:
/// (4/pi) sum_{k>=0} (-1)^k / (2k+1) exp(-(2k+1)^2 pi^2 / (8 a^2)),
/// summed until the term magnitude drops below 1e-15.
inline double max_abs_brownian_cdf(double a) {
  if (!(a > 0.0))
    return 0.0;
  const double c = std::numbers::pi * std::numbers::pi / (8.0 * a * a);
  double sum = 0.0;
  for (long k = 0;; ++k) {
    const double odd = static_cast<double>(2 * k + 1);
    const double term = std::exp(-odd * odd * c) / odd;
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-15)
      break;
  }
  return std::clamp(4.0 / std::numbers::pi * sum, 0.0, 1.0);
}

/// q with max_abs_brownian_cdf(q) = level, by bisection on [1e-6, 50] to an
/// absolute tolerance of 1e-10.
inline double max_abs_brownian_quantile(double level) {
  detail::require(level > 0.0 && level < 1.0, "quantile level must lie in (0, 1)");
  double lo = 1e-6, hi = 50.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (max_abs_brownian_cdf(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Constant-width band curve +- d q / sqrt(n delta) with q the level-quantile
/// of max |B| on [0, 1], level = 1 - alpha.
struct BandResult {
  EstimateCurve curve;
  double half_width = 0.0;
  double level = 0.9;
  double q_value = 0.0;
  double d_value = 0.0;

  double lower(std::size_t i) const { return curve.values[i] - half_width; }
  double upper(std::size_t i) const { return curve.values[i] + half_width; }
};

inline double band_half_width(double d, double q, std::size_t n, double delta) {
  return d * q / std::sqrt(static_cast<double>(n) * delta);
}

inline BandResult confidence_band(const EstimateCurve& curve, double d, double alpha) {
  if (!(d > 0.0) || !std::isfinite(d))
    throw estimation_error("degenerate band: scale estimate d must be positive and finite");
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  detail::require(curve.n >= 1 && curve.delta > 0.0, "curve carries no sample size / delta");
  const double q = max_abs_brownian_quantile(1.0 - alpha);
  return {curve, band_half_width(d, q, curve.n, curve.delta), 1.0 - alpha, q, d};
}

struct TestResult {
  bool reject = false;
  double sup_violation = 0.0;  // max_t |curve - hypothesis| - half_width
};

/// Rejects iff the hypothesised function leaves the band at some grid point.
inline TestResult ks_test(const BandResult& band, const std::vector<double>& hypothesized) {
  detail::require(hypothesized.size() == band.curve.size(),
                  "hypothesis must be evaluated on the band grid");
  double worst = 0.0;
  bool reject = false;
  for (std::size_t i = 0; i < hypothesized.size(); ++i) {
    const double diff = std::abs(band.curve.values[i] - hypothesized[i]);
    worst = std::max(worst, diff);
    if (diff > band.half_width)
      reject = true;
  }
  return {reject, worst - band.half_width};
}

inline TestResult ks_test(const BandResult& band, const std::function<double(double)>& hypothesized) {
  std::vector<double> values(band.curve.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = hypothesized(band.curve.grid[i]);
  return ks_test(band, values);
}

/// Monte-Carlo coverage of a band construction.
struct CoverageReport {
  std::string model;
  Method method = Method::direct;
  std::size_t reps = 0;
  std::size_t n = 0;
  double delta = 0.0;
  double level = 0.9;
  std::size_t hits = 0;
  std::size_t failures = 0;  // replications where estimation itself failed
  double coverage = 0.0;
  double mc_stderr = 0.0;
  double failure_rate = 0.0;
  double mean_half_width = 0.0;

  std::size_t misses() const { return reps - hits - failures; }

  void finalize() {
    const double r = static_cast<double>(reps);
    coverage = reps ? static_cast<double>(hits) / r : 0.0;
    mc_stderr = reps ? std::sqrt(coverage * (1.0 - coverage) / r) : 0.0;
    failure_rate = reps ? static_cast<double>(failures) / r : 0.0;
  }
};

} // namespace levylab
