#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "levylab/curve.hpp"
#include "levylab/errors.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/simulate.hpp"

namespace levylab {

namespace detail {

// Sorted distinct increment values with the cumulative weight of all
// increments <= each value. Equal increments are grouped before summing, so
// repeating every observation k times scales each partial sum by exactly k.
struct WeightedSteps {
  std::vector<double> points;
  std::vector<double> cumulative;

  template <typename W>
  WeightedSteps(std::vector<double> xs, const W& weight) {
    std::sort(xs.begin(), xs.end());
    double running = 0.0;
    for (std::size_t i = 0; i < xs.size();) {
      std::size_t j = i;
      while (j < xs.size() && xs[j] == xs[i])
        ++j;
      running += static_cast<double>(j - i) * weight(xs[i]);
      points.push_back(xs[i]);
      cumulative.push_back(running);
      i = j;
    }
  }

  // Total weight of increments <= t.
  double at_or_below(double t) const {
    const auto it = std::upper_bound(points.begin(), points.end(), t);
    return it == points.begin() ? 0.0 : cumulative[static_cast<std::size_t>(it - points.begin()) - 1];
  }

  // Total weight of increments < t.
  double below(double t) const {
    const auto it = std::lower_bound(points.begin(), points.end(), t);
    return it == points.begin() ? 0.0 : cumulative[static_cast<std::size_t>(it - points.begin()) - 1];
  }

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

} // namespace detail

/// Counting estimator of N_rho(t): (1/(n delta)) sum rho(X_k) X_k^2 1{X_k <= t}.
inline EstimateCurve direct_N(const IncrementSample& sample, const ClipFunction& clip,
                              const std::vector<double>& grid) {
  sample.validate();
  detail::require_grid(grid);
  const detail::WeightedSteps steps(sample.increments,
                                    [&](double x) { return clip(x) * x * x; });
  const double scale = static_cast<double>(sample.size()) * sample.delta;

  EstimateCurve out{grid, std::vector<double>(grid.size()), Method::direct, Target::N,
                    sample.size(), sample.delta, clip};
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.values[i] = steps.at_or_below(grid[i]) / scale;
  return out;
}

/// Counting estimator of the tail function: (1/(n delta)) #{X_k <= t} for
/// t < 0 and (1/(n delta)) #{X_k >= t} for t > 0. All grid points must
/// satisfy |t| >= zeta.
inline EstimateCurve direct_calN(const IncrementSample& sample, double zeta,
                                 const std::vector<double>& grid) {
  sample.validate();
  detail::require(zeta > 0.0, "zeta must be > 0");
  detail::require_grid(grid);
  for (double t : grid)
    if (!(std::abs(t) >= zeta))
      throw domain_error("direct_calN: grid point inside (-zeta, zeta)");

  const detail::WeightedSteps counts(sample.increments, [](double) { return 1.0; });
  const double scale = static_cast<double>(sample.size()) * sample.delta;

  EstimateCurve out{grid, std::vector<double>(grid.size()), Method::direct, Target::calN,
                    sample.size(), sample.delta, ClipFunction{}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double count = t < 0.0 ? counts.at_or_below(t) : counts.total() - counts.below(t);
    out.values[i] = count / scale;
  }
  return out;
}

/// d~ = ((1/(n delta)) sum min(1, X_k^4))^{1/2}.
inline double direct_band_scale(const IncrementSample& sample) {
  sample.validate();
  double acc = 0.0;
  for (double x : sample.increments) {
    const double x2 = x * x;
    acc += x2 >= 1.0 ? 1.0 : x2 * x2;
  }
  return std::sqrt(acc / (static_cast<double>(sample.size()) * sample.delta));
}

} // namespace levylab
