#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "levylab/errors.hpp"
#include "levylab/quadrature.hpp"

namespace levylab {

// ---------------------------------------------------------------------------
// Jump parts. Each carries only the parameters of its Levy measure; the
// diffusion coefficient and the drift live on LevyModel.
// ---------------------------------------------------------------------------

/// nu(x) = (c/x) exp(-lambda x) on x > 0.
struct GammaJumps {
  double c = 30.0;
  double lambda = 1.0;
};

/// Brownian motion with drift theta and volatility s, time-changed by an
/// inverse Gaussian subordinator S with E[S_t] = t and Var[S_t] = kappa t.
struct NigJumps {
  double s = 1.5;
  double theta = 0.1;
  double kappa = 0.5;
};

/// Poisson(intensity) arrivals of Normal(mean, sd^2) jumps.
struct CompoundPoissonGaussJumps {
  double intensity = 1.0;
  double mean = 0.0;
  double sd = 1.0;
};

struct NoJumps {};

using JumpPart = std::variant<GammaJumps, NigJumps, CompoundPoissonGaussJumps, NoJumps>;

enum class ModelKind { gamma, nig, compound_poisson_gauss, brownian };

/// A Levy process given by its jump part, its diffusion coefficient sigma^2
/// and an additive drift per unit time. The drift is added on top of the jump
/// part as simulated (so NIG with drift 0 has E[L_1] = theta and Gamma with
/// drift 0 is a subordinator).
struct LevyModel {
  JumpPart jumps = NoJumps{};
  double sigma2 = 0.0;
  double drift = 0.0;

  static LevyModel gamma(double c, double lambda) { return {GammaJumps{c, lambda}, 0.0, 0.0}; }
  static LevyModel nig(double s, double theta, double kappa, double drift = 0.0) {
    return {NigJumps{s, theta, kappa}, 0.0, drift};
  }
  static LevyModel compound_poisson_gauss(double intensity, double mean, double sd,
                                          double sigma2 = 0.0, double drift = 0.0) {
    return {CompoundPoissonGaussJumps{intensity, mean, sd}, sigma2, drift};
  }
  static LevyModel brownian(double sigma2, double drift = 0.0) { return {NoJumps{}, sigma2, drift}; }

  ModelKind kind() const {
    return static_cast<ModelKind>(jumps.index());
  }

  void validate() const;
};

inline void LevyModel::validate() const {
  using detail::require;
  require(std::isfinite(sigma2) && sigma2 >= 0.0, "sigma2 must be finite and >= 0");
  require(std::isfinite(drift), "drift must be finite");
  std::visit(
      [](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, GammaJumps>) {
          require(std::isfinite(j.c) && j.c > 0.0, "gamma: c must be > 0");
          require(std::isfinite(j.lambda) && j.lambda > 0.0, "gamma: lambda must be > 0");
        } else if constexpr (std::is_same_v<T, NigJumps>) {
          require(std::isfinite(j.s) && j.s > 0.0, "nig: s must be > 0");
          require(std::isfinite(j.theta), "nig: theta must be finite");
          require(std::isfinite(j.kappa) && j.kappa > 0.0, "nig: kappa must be > 0");
        } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
          require(std::isfinite(j.intensity) && j.intensity >= 0.0,
                  "cpg: intensity must be >= 0");
          require(std::isfinite(j.mean), "cpg: mean must be finite");
          require(std::isfinite(j.sd) && j.sd > 0.0, "cpg: sd must be > 0");
        }
      },
      jumps);
}

// ---------------------------------------------------------------------------
// Text form: "gamma:c=30,lambda=1", "nig:s=1.5,theta=0.1,kappa=0.5",
// "cpg:intensity=2,mean=0,sd=1,sigma2=0.5", "brownian:sigma2=1,drift=0".
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view text, std::string_view what) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw config_error("cannot parse '" + s + "' as a number for " + std::string(what));
  return v;
}

} // namespace detail

inline std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::gamma: return "gamma";
  case ModelKind::nig: return "nig";
  case ModelKind::compound_poisson_gauss: return "cpg";
  case ModelKind::brownian: return "brownian";
  }
  return "?";
}

/// Parameter names and values of a model, in canonical order.
inline std::vector<std::pair<std::string, double>> model_parameters(const LevyModel& m) {
  std::vector<std::pair<std::string, double>> out;
  std::visit(
      [&](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, GammaJumps>) {
          out = {{"c", j.c}, {"lambda", j.lambda}};
        } else if constexpr (std::is_same_v<T, NigJumps>) {
          out = {{"s", j.s}, {"theta", j.theta}, {"kappa", j.kappa}};
        } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
          out = {{"intensity", j.intensity}, {"mean", j.mean}, {"sd", j.sd}};
        }
      },
      m.jumps);
  out.emplace_back("sigma2", m.sigma2);
  out.emplace_back("drift", m.drift);
  return out;
}

inline std::string to_string(const LevyModel& m) {
  std::string s = to_string(m.kind()) + ":";
  bool first = true;
  for (const auto& [k, v] : model_parameters(m)) {
    if (!first)
      s += ',';
    first = false;
    s += k + "=" + detail::format_double(v);
  }
  return s;
}

/// Builds a model from a kind name and a key/value map. Unknown keys are an
/// error; missing keys keep their defaults.
inline LevyModel make_model(std::string_view kind, const std::map<std::string, double>& kv) {
  LevyModel m;
  std::map<std::string, double> rest = kv;
  auto take = [&](const char* key, double& slot) {
    if (auto it = rest.find(key); it != rest.end()) {
      slot = it->second;
      rest.erase(it);
    }
  };
  if (kind == "gamma") {
    GammaJumps j;
    take("c", j.c);
    take("lambda", j.lambda);
    m.jumps = j;
  } else if (kind == "nig") {
    NigJumps j;
    take("s", j.s);
    take("theta", j.theta);
    take("kappa", j.kappa);
    m.jumps = j;
  } else if (kind == "cpg" || kind == "compound_poisson_gauss") {
    CompoundPoissonGaussJumps j;
    take("intensity", j.intensity);
    take("mean", j.mean);
    take("sd", j.sd);
    m.jumps = j;
  } else if (kind == "brownian") {
    m.jumps = NoJumps{};
    m.sigma2 = 1.0;
  } else {
    throw config_error("unknown model kind '" + std::string(kind) + "'");
  }
  take("sigma2", m.sigma2);
  take("drift", m.drift);
  if (!rest.empty())
    throw config_error("unknown parameter '" + rest.begin()->first + "' for model " +
                       std::string(kind));
  m.validate();
  return m;
}

inline LevyModel parse_model(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw config_error("model parameter '" + std::string(item) + "' is not key=value");
      const std::string key(item.substr(0, eq));
      kv[key] = detail::parse_double(item.substr(eq + 1), key);
      if (comma == std::string_view::npos)
        break;
      rest = rest.substr(comma + 1);
    }
  }
  return make_model(kind, kv);
}

// ---------------------------------------------------------------------------
// Clipping functions rho
// ---------------------------------------------------------------------------

enum class ClipKind { min_one_inv_x2, rational };

struct ClipFunction {
  ClipKind kind = ClipKind::min_one_inv_x2;

  double operator()(double x) const {
    const double x2 = x * x;
    switch (kind) {
    case ClipKind::min_one_inv_x2: return x2 <= 1.0 ? 1.0 : 1.0 / x2;
    case ClipKind::rational: return 1.0 / (1.0 + x2);
    }
    return 0.0;
  }

  std::string name() const { return kind == ClipKind::rational ? "rational" : "min_one_inv_x2"; }

  static ClipFunction parse(std::string_view s) {
    if (s == "min_one_inv_x2" || s == "min")
      return {ClipKind::min_one_inv_x2};
    if (s == "rational")
      return {ClipKind::rational};
    throw config_error("unknown clip function '" + std::string(s) + "'");
  }

  friend bool operator==(const ClipFunction&, const ClipFunction&) = default;
};

// ---------------------------------------------------------------------------
// Levy densities
// ---------------------------------------------------------------------------

namespace detail {

struct NigConstants {
  double a, b, c;
};

inline NigConstants nig_constants(const NigJumps& j) {
  const double s2 = j.s * j.s;
  const double root = std::sqrt(j.theta * j.theta + s2 / j.kappa);
  return {j.theta / s2, root / s2, root / (std::numbers::pi * j.s * std::sqrt(j.kappa))};
}

} // namespace detail

/// x^2 nu(x), extended continuously to x = 0.
inline double x2_levy_density(const LevyModel& m, double x) {
  return std::visit(
      [x](const auto& j) -> double {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, GammaJumps>) {
          return x > 0.0 ? j.c * x * std::exp(-j.lambda * x) : 0.0;
        } else if constexpr (std::is_same_v<T, NigJumps>) {
          const auto k = detail::nig_constants(j);
          const double ax = std::abs(x);
          const double z = k.b * ax;
          if (z < 1e-8)  // x K_1(b x) -> 1 / b
            return k.c / k.b;
          if (z > 700.0)
            return 0.0;
          return k.c * ax * std::exp(k.a * x) * std::cyl_bessel_k(1.0, z);
        } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
          const double z = (x - j.mean) / j.sd;
          return j.intensity * x * x * std::exp(-0.5 * z * z) /
                 (j.sd * std::sqrt(2.0 * std::numbers::pi));
        } else {
          return 0.0;
        }
      },
      m.jumps);
}

/// Levy density nu(x). Throws domain_error at x = 0.
inline double levy_density(const LevyModel& m, double x) {
  if (x == 0.0)
    throw domain_error("levy_density is undefined at x = 0");
  return x2_levy_density(m, x) / (x * x);
}

/// Points beyond which x^2 nu carries less than `tail_tol` mass on each side.
/// Returns {left, right} with left <= 0 <= right; a side without jumps gives 0.
inline std::pair<double, double> jump_support(const LevyModel& m, double tail_tol = 1e-14) {
  auto scan = [&](double sign, double start) {
    double x = start;
    for (int i = 0; i < 400 && x < 1e5; ++i) {
      if (x * x2_levy_density(m, sign * x) < tail_tol)
        return sign * x;
      x *= 1.1;
    }
    return sign * x;
  };
  return std::visit(
      [&](const auto& j) -> std::pair<double, double> {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, GammaJumps>) {
          return {0.0, scan(1.0, std::max(1.0, 1.0 / j.lambda))};
        } else if constexpr (std::is_same_v<T, NigJumps>) {
          return {scan(-1.0, 1.0), scan(1.0, 1.0)};
        } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
          if (j.intensity == 0.0)
            return {0.0, 0.0};
          return {scan(-1.0, std::max(1.0, -j.mean + j.sd)),
                  scan(1.0, std::max(1.0, j.mean + j.sd))};
        } else {
          return {0.0, 0.0};
        }
      },
      m.jumps);
}

/// Integral of f(x) x^2 nu(x) over [lo, hi] (infinite limits allowed) by
/// adaptive Simpson, split at the origin and at |x| = 1. Intervals that stay
/// on one side of the origin are additionally split geometrically towards it
/// so that integrands behaving like 1/x near 0 are resolved.
template <typename F>
double integrate_x2nu(const LevyModel& m, const F& f, double lo, double hi, double tol = 1e-9) {
  if (!(tol > 0.0))
    throw config_error("tol must be positive");
  const auto [left, right] = jump_support(m);
  lo = std::max(lo, left);
  hi = std::min(hi, right);
  if (!(lo < hi))
    return 0.0;

  std::vector<double> cuts{lo, hi};
  for (double c : {-1.0, 0.0, 1.0})
    if (c > lo && c < hi)
      cuts.push_back(c);
  const double inner = std::min(std::abs(lo), std::abs(hi));
  if ((lo >= 0.0 || hi <= 0.0) && inner > 0.0) {
    const double sign = hi <= 0.0 ? -1.0 : 1.0;
    for (double p = 0.5; p > inner; p *= 0.5)
      if (sign * p > lo && sign * p < hi)
        cuts.push_back(sign * p);
  }
  std::sort(cuts.begin(), cuts.end());

  auto integrand = [&](double x) { return f(x) * x2_levy_density(m, x); };
  const double piece_tol = tol / static_cast<double>(cuts.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += quadrature::adaptive_simpson(integrand, cuts[i], cuts[i + 1], piece_tol);
  return total;
}

/// N_rho(t) = int_{-inf}^t rho(x) x^2 nu(dx).
inline double true_N(const LevyModel& m, const ClipFunction& clip, double t, double tol = 1e-9) {
  if (std::isnan(t))
    throw domain_error("true_N: t is NaN");
  return integrate_x2nu(m, clip, -std::numeric_limits<double>::infinity(), t, tol);
}

/// true_N on an increasing grid, accumulated panel by panel so that the curve
/// is nondecreasing by construction for nonnegative clips.
inline std::vector<double> true_N_curve(const LevyModel& m, const ClipFunction& clip,
                                        const std::vector<double>& grid, double tol = 1e-9) {
  std::vector<double> out(grid.size());
  if (grid.empty())
    return out;
  const double piece_tol = tol / static_cast<double>(grid.size());
  out[0] = true_N(m, clip, grid[0], piece_tol);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw config_error("grid must be strictly increasing");
    out[i] = out[i - 1] + integrate_x2nu(m, clip, grid[i - 1], grid[i], piece_tol);
  }
  return out;
}

/// Tail mass of nu beyond t: nu((-inf, t]) for t < 0, nu([t, inf)) for t > 0.
inline double true_calN(const LevyModel& m, double t, double tol = 1e-9) {
  if (t == 0.0 || std::isnan(t))
    throw domain_error("true_calN is undefined at t = 0");
  const auto inv_x2 = [](double x) { return 1.0 / (x * x); };
  constexpr double inf = std::numeric_limits<double>::infinity();
  return t < 0.0 ? integrate_x2nu(m, inv_x2, -inf, t, tol) : integrate_x2nu(m, inv_x2, t, inf, tol);
}

/// int x^2 nu(dx), in closed form.
inline double second_moment_nu(const LevyModel& m) {
  return std::visit(
      [](const auto& j) -> double {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, GammaJumps>) {
          return j.c / (j.lambda * j.lambda);
        } else if constexpr (std::is_same_v<T, NigJumps>) {
          return j.s * j.s + j.theta * j.theta * j.kappa;
        } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
          return j.intensity * (j.mean * j.mean + j.sd * j.sd);
        } else {
          return 0.0;
        }
      },
      m.jumps);
}

/// (int min(1, x^4) nu(dx))^{1/2}: the scale of the limiting Gaussian process
/// of the N estimators.
inline double true_band_scale(const LevyModel& m, double tol = 1e-10) {
  const auto w = [](double x) { const double x2 = x * x; return x2 <= 1.0 ? x2 : 1.0 / x2; };
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::sqrt(integrate_x2nu(m, w, -inf, inf, tol));
}

// ---------------------------------------------------------------------------
// Characteristic exponent psi(u) = log(E exp(iuL_1)) and its derivatives
// ---------------------------------------------------------------------------

struct ExponentDerivatives {
  std::complex<double> psi, d1, d2;
};

inline ExponentDerivatives characteristic_exponent(const LevyModel& m, double u) {
  using cd = std::complex<double>;
  static constexpr cd i{0.0, 1.0};
  ExponentDerivatives e = std::visit(
      [u](const auto& j) -> ExponentDerivatives {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, GammaJumps>) {
          const cd base = j.lambda - i * u;
          return {-j.c * std::log(base / j.lambda), i * j.c / base, -j.c / (base * base)};
        } else if constexpr (std::is_same_v<T, NigJumps>) {
          // psi = L(q(u)), L(q) = (1 - sqrt(1 + 2 kappa q)) / kappa,
          // q(u) = -i theta u + s^2 u^2 / 2.
          const double s2 = j.s * j.s;
          const cd q = -i * j.theta * u + 0.5 * s2 * u * u;
          const cd dq = -i * j.theta + s2 * u;
          const cd root = std::sqrt(1.0 + 2.0 * j.kappa * q);
          const cd l0 = (1.0 - root) / j.kappa;
          const cd l1 = -1.0 / root;
          const cd l2 = j.kappa / (root * root * root);
          return {l0, l1 * dq, l2 * dq * dq + l1 * s2};
        } else if constexpr (std::is_same_v<T, CompoundPoissonGaussJumps>) {
          const double v = j.sd * j.sd;
          const cd e = std::exp(i * u * j.mean - 0.5 * v * u * u);
          const cd g = i * j.mean - v * u;
          return {j.intensity * (e - 1.0), j.intensity * g * e, j.intensity * (g * g - v) * e};
        } else {
          return {0.0, 0.0, 0.0};
        }
      },
      m.jumps);
  e.psi += -0.5 * m.sigma2 * u * u + i * m.drift * u;
  e.d1 += -m.sigma2 * u + i * m.drift;
  e.d2 += -m.sigma2;
  return e;
}

} // namespace levylab
