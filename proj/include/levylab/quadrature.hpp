#pragma once

#include <cmath>
#include <limits>

#include "levylab/errors.hpp"

namespace levylab {
namespace quadrature {

namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth,
                    bool& exhausted) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || !(std::abs(delta) > 15.0 * tol)) {
    if (depth <= 0 && std::abs(delta) > 15.0 * tol)
      exhausted = true;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, exhausted) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, exhausted);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with Richardson correction.
/// The absolute error target is tol; recursion depth is capped at max_depth,
/// after which the best available estimate is returned. Throws
/// estimation_error if the integrand produces a non-finite value.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
  if (!(tol > 0.0))
    throw config_error("quadrature tolerance must be positive");
  if (a == b)
    return 0.0;
  if (a > b)
    return -adaptive_simpson(f, b, a, tol, max_depth);

  // Seed with a fixed split so that narrow features are not missed by the
  // initial five-point sample.
  constexpr int seed_panels = 8;
  const double width = (b - a) / seed_panels;
  const double panel_tol = tol / seed_panels;
  double total = 0.0;
  bool exhausted = false;
  for (int i = 0; i < seed_panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == seed_panels) ? b : a + (i + 1) * width;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fhi = f(hi), fmid = f(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, panel_tol,
                                  max_depth, exhausted);
  }
  if (!std::isfinite(total))
    throw estimation_error("quadrature produced a non-finite value");
  return total;
}

} // namespace quadrature
} // namespace levylab
