#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "levylab/curve.hpp"
#include "levylab/errors.hpp"
#include "levylab/fourier.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/simulate.hpp"

namespace levylab {

using complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct SigmaZero {
  friend bool operator==(const SigmaZero&, const SigmaZero&) = default;
};
struct SigmaKnown {
  double sigma2 = 0.0;
  friend bool operator==(const SigmaKnown&, const SigmaKnown&) = default;
};
/// Pilot estimate from the modulus of the empirical characteristic function.
struct SigmaEstimate {
  friend bool operator==(const SigmaEstimate&, const SigmaEstimate&) = default;
};
using SigmaMode = std::variant<SigmaZero, SigmaKnown, SigmaEstimate>;

inline std::string to_string(const SigmaMode& mode) {
  if (std::holds_alternative<SigmaZero>(mode))
    return "zero";
  if (std::holds_alternative<SigmaEstimate>(mode))
    return "estimate";
  return "known:" + detail::format_double(std::get<SigmaKnown>(mode).sigma2);
}

/// "zero", "estimate" or "known:<sigma2>".
inline SigmaMode parse_sigma_mode(std::string_view s) {
  if (s == "zero")
    return SigmaZero{};
  if (s == "estimate")
    return SigmaEstimate{};
  if (s.starts_with("known:")) {
    const double v = detail::parse_double(s.substr(6), "sigma");
    detail::require(std::isfinite(v) && v >= 0.0, "known sigma2 must be >= 0");
    return SigmaKnown{v};
  }
  throw config_error("sigma mode must be zero, estimate or known:<v>, got '" + std::string(s) + "'");
}

struct SpectralConfig {
  std::optional<double> h;      // bandwidth; sqrt(delta) when unset
  double c_flat = 0.5;          // kernel FT is 1 on [-c_flat, c_flat]
  std::size_t u_points = 4096;  // frequency nodes on [-1/h, 1/h]
  double x_range = 8.0;         // spatial grid [-A, A)
  std::size_t x_points = 8192;  // spatial nodes, power of two
  double cf_floor = 1e-12;
  SigmaMode sigma = SigmaZero{};
  double c0 = 1.0 / 6.0;
  double sigma_max = 1.0;

  double bandwidth(double delta) const { return h ? *h : std::sqrt(delta); }

  void validate() const {
    using detail::require;
    if (h)
      require(std::isfinite(*h) && *h > 0.0, "h must be > 0");
    require(c_flat > 0.0 && c_flat < 1.0, "c_flat must lie in (0, 1)");
    require(u_points >= 4 && u_points % 2 == 0, "u_points must be even and >= 4");
    require(std::isfinite(x_range) && x_range > 0.0, "x_range must be > 0");
    require(x_points >= 4 && (x_points & (x_points - 1)) == 0, "x_points must be a power of two");
    require(cf_floor > 0.0, "cf_floor must be > 0");
    require(c0 > 0.0 && c0 < 0.5, "c0 must lie in (0, 1/2)");
    require(std::isfinite(sigma_max) && sigma_max > 0.0, "sigma_max must be > 0");
    if (const auto* k = std::get_if<SigmaKnown>(&sigma))
      require(std::isfinite(k->sigma2) && k->sigma2 >= 0.0, "known sigma2 must be >= 0");
  }

  friend bool operator==(const SpectralConfig&, const SpectralConfig&) = default;
};

/// Symmetric equispaced frequency grid with `points` nodes covering exactly
/// [-1/h, 1/h]; u[j] == -u[points - 1 - j] holds bit for bit.
inline std::vector<double> frequency_grid(double h, std::size_t points) {
  detail::require(h > 0.0 && points >= 2, "frequency grid needs h > 0 and >= 2 points");
  const double top = 1.0 / h;
  const double denom = static_cast<double>(points - 1);
  std::vector<double> u(points);
  for (std::size_t j = 0; j < points; ++j)
    u[j] = top * (2.0 * static_cast<double>(j) - denom) / denom;
  return u;
}

// ---------------------------------------------------------------------------
// Characteristic functions
// ---------------------------------------------------------------------------

/// phi and its first two derivatives on a frequency grid.
struct CfTriple {
  std::vector<complex> phi, d1, d2;
};

namespace detail {

inline bool is_symmetric_equispaced(std::span<const double> u) {
  const std::size_t p = u.size();
  if (p < 3)
    return false;
  const double step = (u[p - 1] - u[0]) / static_cast<double>(p - 1);
  if (!(step > 0.0))
    return false;
  for (std::size_t j = 0; j < p; ++j) {
    if (u[j] != -u[p - 1 - j])
      return false;
    if (std::abs(u[j] - (u[0] + step * static_cast<double>(j))) > 1e-9 * std::abs(step))
      return false;
  }
  return true;
}

} // namespace detail

/// Empirical characteristic function phi(u) = mean(exp(iuX)) and its
/// derivatives phi' = mean(iX exp(iuX)), phi'' = -mean(X^2 exp(iuX)).
///
/// On the symmetric equispaced grids produced by frequency_grid only the
/// nonnegative half is evaluated (by a phase recurrence re-anchored every 32
/// nodes) and the rest follows from phi(-u) = conj(phi(u)), which makes the
/// inverse transform real up to FFT rounding.
inline CfTriple ecf_with_derivatives(const IncrementSample& sample, std::span<const double> u) {
  sample.validate();
  detail::require(!u.empty(), "frequency grid must be nonempty");
  const std::size_t p = u.size();
  const std::size_t n = sample.size();
  const auto& xs = sample.increments;
  const double inv_n = 1.0 / static_cast<double>(n);
  CfTriple cf{std::vector<complex>(p), std::vector<complex>(p), std::vector<complex>(p)};

  auto accumulate_at = [&](std::size_t j, const std::vector<complex>& e) {
    double r0 = 0, i0 = 0, r1 = 0, i1 = 0, r2 = 0, i2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = xs[k];
      const double c = e[k].real(), s = e[k].imag();
      r0 += c;
      i0 += s;
      r1 += x * c;
      i1 += x * s;
      r2 += x * x * c;
      i2 += x * x * s;
    }
    cf.phi[j] = {r0 * inv_n, i0 * inv_n};
    cf.d1[j] = {-i1 * inv_n, r1 * inv_n};   // i * (r1 + i i1)
    cf.d2[j] = {-r2 * inv_n, -i2 * inv_n};
  };

  std::vector<complex> e(n);
  if (detail::is_symmetric_equispaced(u)) {
    const std::size_t half = p / 2;
    const double step = (u[p - 1] - u[0]) / static_cast<double>(p - 1);
    std::vector<complex> rot(n);
    for (std::size_t k = 0; k < n; ++k)
      rot[k] = std::polar(1.0, step * xs[k]);
    for (std::size_t j = half; j < p; ++j) {
      if ((j - half) % 32 == 0) {
        for (std::size_t k = 0; k < n; ++k)
          e[k] = std::polar(1.0, u[j] * xs[k]);
      } else {
        for (std::size_t k = 0; k < n; ++k)
          e[k] *= rot[k];
      }
      accumulate_at(j, e);
    }
    for (std::size_t j = 0; j < p - half; ++j) {
      const std::size_t m = p - 1 - j;
      if (m == j)
        continue;
      cf.phi[j] = std::conj(cf.phi[m]);
      cf.d1[j] = -std::conj(cf.d1[m]);
      cf.d2[j] = std::conj(cf.d2[m]);
    }
  } else {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < n; ++k)
        e[k] = std::polar(1.0, u[j] * xs[k]);
      accumulate_at(j, e);
    }
  }
  return cf;
}

/// Exact characteristic function of the delta-increment of a model, with
/// derivatives: phi = exp(delta psi), phi' = delta psi' phi,
/// phi'' = (delta psi'' + (delta psi')^2) phi.
inline CfTriple model_cf_with_derivatives(const LevyModel& model, double delta,
                                          std::span<const double> u) {
  model.validate();
  detail::require(delta > 0.0, "delta must be > 0");
  CfTriple cf{std::vector<complex>(u.size()), std::vector<complex>(u.size()),
              std::vector<complex>(u.size())};
  for (std::size_t j = 0; j < u.size(); ++j) {
    const auto e = characteristic_exponent(model, u[j]);
    const complex phi = std::exp(delta * e.psi);
    const complex g1 = delta * e.d1;
    cf.phi[j] = phi;
    cf.d1[j] = g1 * phi;
    cf.d2[j] = (delta * e.d2 + g1 * g1) * phi;
  }
  return cf;
}

struct PsiEstimate {
  std::vector<complex> values;
  std::size_t guarded = 0;  // nodes where |phi| fell below cf_floor
};

/// psi''(u) = (phi'' phi - phi'^2) / (delta phi^2). Where |phi| < cf_floor
/// phi is projected onto the circle of radius cf_floor, keeping its phase.
inline PsiEstimate psi_dd_hat(const CfTriple& cf, double delta, double cf_floor) {
  const std::size_t p = cf.phi.size();
  detail::require(cf.d1.size() == p && cf.d2.size() == p, "characteristic function arrays differ in length");
  detail::require(p > 0, "empty characteristic function arrays");
  detail::require(delta > 0.0 && cf_floor > 0.0, "delta and cf_floor must be > 0");
  PsiEstimate out{std::vector<complex>(p), 0};
  for (std::size_t j = 0; j < p; ++j) {
    complex phi = cf.phi[j];
    const double mod = std::abs(phi);
    if (mod < cf_floor) {
      phi = mod > 0.0 ? phi * (cf_floor / mod) : complex{cf_floor, 0.0};
      ++out.guarded;
    }
    out.values[j] = (cf.d2[j] * phi - cf.d1[j] * cf.d1[j]) / (delta * phi * phi);
  }
  if (out.guarded == p)
    throw estimation_error("characteristic function below cf_floor on the whole frequency grid "
                           "(delta too large or n too small)");
  return out;
}

/// Fourier transform of the flat-top kernel: 1 on |v| <= c_flat, 0 on
/// |v| >= 1, and a C^2 quintic taper 1 - s^3 (10 - 15 s + 6 s^2) in between.
inline double flat_top_kernel_ft(double v, double c_flat) {
  const double a = std::abs(v);
  if (a <= c_flat)
    return 1.0;
  if (a >= 1.0)
    return 0.0;
  const double s = (a - c_flat) / (1.0 - c_flat);
  return std::clamp(1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Smoothed estimate of sigma^2 delta_0 + x^2 nu on the spatial grid
// ---------------------------------------------------------------------------

/// F^{-1}[(-psi'' - sigma2) FK(h .)] sampled at x_k = -A + k dx, k < M.
struct SpectralDensity {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> values;

  double h = 0.0;
  double sigma2 = 0.0;
  std::size_t guarded = 0;
  double max_imag = 0.0;  // largest |Im| discarded by the real projection
  double max_real = 0.0;

  std::size_t size() const { return values.size(); }
  double x(std::size_t k) const { return x0 + dx * static_cast<double>(k); }
  double x_max() const { return x(values.size() - 1); }
};

/// Core pipeline from a characteristic-function triple on frequency_grid(h,
/// u_points). sigma2 is subtracted as given.
inline SpectralDensity spectral_density_from_cf(const CfTriple& cf, double delta, double sigma2,
                                                const SpectralConfig& cfg) {
  cfg.validate();
  const double h = cfg.bandwidth(delta);
  const std::vector<double> u = frequency_grid(h, cfg.u_points);
  detail::require(cf.phi.size() == u.size(), "characteristic function does not match u_points");

  const PsiEstimate psi = psi_dd_hat(cf, delta, cfg.cf_floor);
  const std::size_t p = u.size();
  const std::size_t m = cfg.x_points;
  const double du = (u[p - 1] - u[0]) / static_cast<double>(p - 1);
  const double dx = 2.0 * cfg.x_range / static_cast<double>(m);
  const double a = cfg.x_range;

  // Trapezoid weights times exp(i u_j A) absorb the offset of the x-grid.
  std::vector<complex> weighted(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double w = (j == 0 || j + 1 == p) ? 0.5 : 1.0;
    const complex g = (-psi.values[j] - sigma2) * flat_top_kernel_ft(h * u[j], cfg.c_flat);
    weighted[j] = w * g * std::polar(1.0, u[j] * a);
  }

  ChirpTransform chirp(p, m, du * dx);
  const std::vector<complex> sums = chirp(weighted);

  SpectralDensity out;
  out.x0 = -a;
  out.dx = dx;
  out.values.resize(m);
  out.h = h;
  out.sigma2 = sigma2;
  out.guarded = psi.guarded;
  const double top = -u[0];
  const double scale = du / (2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < m; ++k) {
    const complex v = scale * std::polar(1.0, top * dx * static_cast<double>(k)) * sums[k];
    out.values[k] = v.real();
    out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
    out.max_real = std::max(out.max_real, std::abs(v.real()));
  }
  return out;
}

/// Pilot estimate of sigma^2 from |phi_n(u_n)| at
/// u_n = sqrt(2 c0 log(n) / (delta sigma_max^2)):
/// max(0, -2 log|phi_n(u_n)| / (delta u_n^2)).
inline double sigma2_hat(const IncrementSample& sample, double c0, double sigma_max) {
  sample.validate();
  detail::require(sample.size() >= 2, "sigma2_hat needs n >= 2");
  detail::require(c0 > 0.0 && c0 < 0.5, "c0 must lie in (0, 1/2)");
  detail::require(sigma_max > 0.0, "sigma_max must be > 0");
  const double n = static_cast<double>(sample.size());
  const double un = std::sqrt(2.0 * c0 * std::log(n) / (sample.delta * sigma_max * sigma_max));
  double re = 0.0, im = 0.0;
  for (double x : sample.increments) {
    re += std::cos(un * x);
    im += std::sin(un * x);
  }
  const double mod = std::hypot(re, im) / n;
  if (!(mod > 0.0))
    throw estimation_error("empirical characteristic function vanishes at u_n");
  return std::max(0.0, -2.0 * std::log(mod) / (sample.delta * un * un));
}

inline double resolve_sigma2(const IncrementSample& sample, const SpectralConfig& cfg) {
  return std::visit(
      [&](const auto& mode) -> double {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, SigmaKnown>)
          return mode.sigma2;
        else if constexpr (std::is_same_v<T, SigmaEstimate>)
          return sigma2_hat(sample, cfg.c0, cfg.sigma_max);
        else
          return 0.0;
      },
      cfg.sigma);
}

inline SpectralDensity spectral_density_on_grid(const IncrementSample& sample,
                                                const SpectralConfig& cfg) {
  cfg.validate();
  sample.validate();
  const double sigma2 = resolve_sigma2(sample, cfg);
  const auto u = frequency_grid(cfg.bandwidth(sample.delta), cfg.u_points);
  return spectral_density_from_cf(ecf_with_derivatives(sample, u), sample.delta, sigma2, cfg);
}

/// Same pipeline driven by the exact characteristic function of `model`.
/// sigma2 follows cfg.sigma, with SigmaEstimate falling back to the model's
/// own sigma2.
inline SpectralDensity spectral_density_from_model(const LevyModel& model, double delta,
                                                   const SpectralConfig& cfg) {
  cfg.validate();
  const auto u = frequency_grid(cfg.bandwidth(delta), cfg.u_points);
  double sigma2 = model.sigma2;
  if (std::holds_alternative<SigmaZero>(cfg.sigma))
    sigma2 = 0.0;
  else if (const auto* k = std::get_if<SigmaKnown>(&cfg.sigma))
    sigma2 = k->sigma2;
  return spectral_density_from_cf(model_cf_with_derivatives(model, delta, u), delta, sigma2, cfg);
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

namespace detail {

// Cumulative trapezoid of f over the density grid: out[k] = int_{x_0}^{x_k}.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double dx) {
  std::vector<double> c(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k)
    c[k] = c[k - 1] + 0.5 * dx * (f[k - 1] + f[k]);
  return c;
}

inline double interpolate_on_grid(const SpectralDensity& d, const std::vector<double>& c, double t) {
  const double pos = (t - d.x0) / d.dx;
  if (pos <= 0.0)
    return c.front();
  const double last = static_cast<double>(c.size() - 1);
  if (pos >= last)
    return c.back();
  const auto k = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(k);
  return c[k] + frac * (c[k + 1] - c[k]);
}

inline void require_in_range(const SpectralDensity& d, const std::vector<double>& grid) {
  const double a = -d.x0;
  for (double t : grid)
    if (t < -a || t > a)
      throw config_error("t = " + format_double(t) + " lies outside the spectral x-range");
}

} // namespace detail

/// N_rho estimate: int_{-A}^{t} rho(x) D(x) dx by cumulative trapezoid,
/// linearly interpolated between x-grid nodes.
inline EstimateCurve spectral_N(const SpectralDensity& density, const ClipFunction& clip,
                                const std::vector<double>& grid, std::size_t n, double delta) {
  detail::require_grid(grid);
  detail::require_in_range(density, grid);
  std::vector<double> f(density.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    f[k] = clip(density.x(k)) * density.values[k];
  const auto c = detail::cumulative_trapezoid(f, density.dx);
  EstimateCurve out{grid, std::vector<double>(grid.size()), Method::spectral, Target::N, n, delta, clip};
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.values[i] = detail::interpolate_on_grid(density, c, grid[i]);
  return out;
}

inline EstimateCurve spectral_N(const IncrementSample& sample, const SpectralConfig& cfg,
                                const ClipFunction& clip, const std::vector<double>& grid) {
  return spectral_N(spectral_density_on_grid(sample, cfg), clip, grid, sample.size(), sample.delta);
}

/// Tail function estimate: int x^{-2} D(x) over (-A, t] for t < 0 and over
/// [t, A) for t > 0. zeta must leave at least ten grid cells around 0.
inline EstimateCurve spectral_calN(const SpectralDensity& density, double zeta,
                                   const std::vector<double>& grid, std::size_t n, double delta) {
  detail::require(zeta > 0.0, "zeta must be > 0");
  detail::require(zeta >= 10.0 * density.dx,
                  "zeta must be at least ten x-grid cells (increase x_points or zeta)");
  detail::require_grid(grid);
  detail::require_in_range(density, grid);
  for (double t : grid)
    if (!(std::abs(t) >= zeta))
      throw domain_error("spectral_calN: grid point inside (-zeta, zeta)");

  const std::size_t m = density.size();
  std::vector<double> f(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = density.x(k);
    f[k] = x == 0.0 ? 0.0 : density.values[k] / (x * x);
  }
  const auto left = detail::cumulative_trapezoid(f, density.dx);
  std::vector<double> right(m);
  for (std::size_t k = 0; k < m; ++k)
    right[k] = left.back() - left[k];

  EstimateCurve out{grid, std::vector<double>(grid.size()), Method::spectral, Target::calN, n, delta,
                    ClipFunction{}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    out.values[i] = t < 0.0 ? detail::interpolate_on_grid(density, left, t)
                            : detail::interpolate_on_grid(density, right, t);
  }
  return out;
}

inline EstimateCurve spectral_calN(const IncrementSample& sample, const SpectralConfig& cfg,
                                   double zeta, const std::vector<double>& grid) {
  return spectral_calN(spectral_density_on_grid(sample, cfg), zeta, grid, sample.size(),
                       sample.delta);
}

struct BandScaleEstimate {
  double value = 0.0;
  double clipped_fraction = 0.0;  // share of |integrand| mass that was negative
};

/// d^ = (int min(x^-2, x^2) D(x) dx)^{1/2} with negative integrand values set
/// to zero before integrating.
inline BandScaleEstimate spectral_band_scale_detail(const SpectralDensity& density) {
  double pos = 0.0, neg = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double x = density.x(k);
    const double x2 = x * x;
    const double w = x2 <= 1.0 ? x2 : 1.0 / x2;
    const double trap = (k == 0 || k + 1 == density.size()) ? 0.5 : 1.0;
    const double v = trap * w * density.values[k] * density.dx;
    (v >= 0.0 ? pos : neg) += std::abs(v);
  }
  if (!std::isfinite(pos))
    throw estimation_error("band scale integral is not finite");
  const double total = pos + neg;
  return {std::sqrt(pos), total > 0.0 ? neg / total : 0.0};
}

inline double spectral_band_scale(const SpectralDensity& density) {
  return spectral_band_scale_detail(density).value;
}

inline double spectral_band_scale(const IncrementSample& sample, const SpectralConfig& cfg) {
  return spectral_band_scale(spectral_density_on_grid(sample, cfg));
}

} // namespace levylab
