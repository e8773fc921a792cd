#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "levylab/errors.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/simulate.hpp"

namespace levylab {

enum class Method { direct, spectral };
enum class Target { N, calN };

inline std::string to_string(Method m) { return m == Method::direct ? "direct" : "spectral"; }
inline std::string to_string(Target t) { return t == Target::N ? "N" : "calN"; }

inline Method parse_method(std::string_view s) {
  if (s == "direct")
    return Method::direct;
  if (s == "spectral")
    return Method::spectral;
  throw config_error("unknown method '" + std::string(s) + "'");
}

inline Target parse_target(std::string_view s) {
  if (s == "N")
    return Target::N;
  if (s == "calN" || s == "tail")
    return Target::calN;
  throw config_error("unknown target '" + std::string(s) + "'");
}

/// An estimated function sampled on a strictly increasing grid of t-values.
struct EstimateCurve {
  std::vector<double> grid;
  std::vector<double> values;
  Method method = Method::direct;
  Target target = Target::N;
  std::size_t n = 0;
  double delta = 0.0;
  ClipFunction clip{};

  std::size_t size() const { return grid.size(); }
};

/// Equispaced grid specification [lo, hi] with `points` nodes.
struct GridSpec {
  double lo = -3.0;
  double hi = 3.0;
  std::size_t points = 512;

  void validate() const {
    detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "grid needs lo < hi");
    detail::require(points >= 2, "grid needs at least 2 points");
  }

  std::vector<double> build() const {
    validate();
    std::vector<double> g(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
      g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Hull of the central 99.9% of the sample and [-3, 3].
inline GridSpec default_grid(const IncrementSample& sample, std::size_t points = 512) {
  sample.validate();
  std::vector<double> sorted = sample.increments;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size())
      return sorted.back();
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
  };
  return {std::min(-3.0, quantile(0.0005)), std::max(3.0, quantile(0.9995)), points};
}

namespace detail {

inline void require_grid(const std::vector<double>& grid) {
  require(!grid.empty(), "grid must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(!std::isnan(grid[i]), "grid contains NaN");
    if (i > 0)
      require(grid[i] > grid[i - 1], "grid must be strictly increasing");
  }
}

} // namespace detail

} // namespace levylab
