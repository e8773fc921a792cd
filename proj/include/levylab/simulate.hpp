#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "levylab/errors.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/random.hpp"

namespace levylab {

/// n increments X_k = L_{k delta} - L_{(k-1) delta} of a Levy process.
struct IncrementSample {
  std::vector<double> increments;
  double delta = 1.0;
  std::string model_tag = "external";
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t size() const { return increments.size(); }

  void validate() const {
    detail::require(!increments.empty(), "sample must contain at least one increment");
    detail::require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
    for (double x : increments)
      detail::require(std::isfinite(x), "sample contains a non-finite increment");
  }
};

namespace detail {

// Gamma(shape, 1). For shape < 1 a Gamma(shape + 1) draw is scaled by
// U^{1/shape}.
template <typename Engine>
double gamma_unit(Engine& eng, double shape) {
  if (shape >= 1.0)
    return std::gamma_distribution<double>(shape, 1.0)(eng);
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(eng);
  return g * std::pow(uniform_open01(eng), 1.0 / shape);
}

// Inverse Gaussian with mean mu and shape lambda (variance mu^3 / lambda) by
// the Michael-Schucany-Haas transformation.
template <typename Engine>
double inverse_gaussian(Engine& eng, std::normal_distribution<double>& normal, double mu,
                        double lambda) {
  const double z = normal(eng);
  const double r = mu * z * z / (2.0 * lambda);
  // Smaller root of the quadratic, written without cancellation.
  const double x = mu / (1.0 + r + std::sqrt(r * (r + 2.0)));
  return uniform_open01(eng) * (mu + x) <= mu ? x : mu * mu / x;
}

} // namespace detail

/// Draws n i.i.d. increments over time step delta from stream `stream` of
/// `seed`. Output is a pure function of (model, n, delta, seed, stream).
inline IncrementSample sample_increments(const LevyModel& model, std::size_t n, double delta,
                                         std::uint64_t seed, std::uint64_t stream = 0) {
  model.validate();
  detail::require(n >= 1, "n must be >= 1");
  detail::require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");

  Philox4x32 eng(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double diffusion_scale = std::sqrt(model.sigma2 * delta);
  const double drift_step = model.drift * delta;

  IncrementSample out;
  out.delta = delta;
  out.model_tag = to_string(model);
  out.seed = seed;
  out.stream = stream;
  out.increments.resize(n);

  std::visit(
      [&](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        for (double& x : out.increments) {
          double jump = 0.0;
          if constexpr (std::is_same_v<T, GammaJumps>) {
            jump = detail::gamma_unit(eng, j.c * delta) / j.lambda;
          } else if constexpr (std::is_same_v<T, NigJumps>) {
            const double s = detail::inverse_gaussian(eng, normal, delta, delta * delta / j.kappa);
            jump = j.theta * s + j.s * std::sqrt(s) * normal(eng);
          } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
            // The sum of k Normal(mean, sd^2) jumps is Normal(k mean, k sd^2).
            const double rate = j.intensity * delta;
            const long k = rate > 0.0 ? std::poisson_distribution<long>(rate)(eng) : 0;
            if (k > 0)
              jump = static_cast<double>(k) * j.mean +
                     j.sd * std::sqrt(static_cast<double>(k)) * normal(eng);
          }
          x = jump + drift_step;
          if (model.sigma2 > 0.0)
            x += diffusion_scale * normal(eng);
        }
      },
      model.jumps);
  return out;
}

} // namespace levylab
