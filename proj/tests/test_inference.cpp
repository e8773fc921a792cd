#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "levylab/estimate_direct.hpp"
#include "levylab/inference.hpp"
#include "oracles/brownian_max_mc.hpp"

using namespace levylab;
using Catch::Matchers::WithinAbs;

namespace {

EstimateCurve flat_curve(std::size_t points, double n_delta) {
  EstimateCurve c;
  for (std::size_t i = 0; i < points; ++i) {
    c.grid.push_back(static_cast<double>(i));
    c.values.push_back(std::sin(static_cast<double>(i)));
  }
  c.n = 100;
  c.delta = n_delta / 100.0;
  return c;
}

} // namespace

TEST_CASE("max |B| CDF limits and monotonicity", "[inference]") {
  CHECK(max_abs_brownian_cdf(0.0) == 0.0);
  CHECK(max_abs_brownian_cdf(-1.0) == 0.0);
  CHECK(max_abs_brownian_cdf(1e-3) < 1e-12);
  CHECK(max_abs_brownian_cdf(10.0) > 1.0 - 1e-10);
  double prev = 0.0;
  for (int i = 1; i <= 40; ++i) {
    const double v = max_abs_brownian_cdf(0.1 * i);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("quantile inverts the CDF", "[inference]") {
  CHECK_THAT(max_abs_brownian_quantile(max_abs_brownian_cdf(1.0)), WithinAbs(1.0, 1e-9));
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> level(0.01, 0.99);
  for (int i = 0; i < 50; ++i) {
    const double p = level(eng);
    CHECK_THAT(max_abs_brownian_cdf(max_abs_brownian_quantile(p)), WithinAbs(p, 1e-9));
  }
  CHECK(max_abs_brownian_quantile(0.5) < max_abs_brownian_quantile(0.9));
  CHECK(max_abs_brownian_quantile(0.9) < max_abs_brownian_quantile(0.95));
  CHECK_THROWS_AS(max_abs_brownian_quantile(1.0), config_error);
}

TEST_CASE("quantiles agree with simulated Brownian paths", "[inference][oracle]") {
  const std::size_t paths = 200000;
  const auto draws = oracle::simulate_max_abs_brownian(paths, 1000, 77);
  for (double p : {0.5, 0.9}) {
    const double q = max_abs_brownian_quantile(p);
    const double se = std::sqrt(p * (1 - p) / paths);
    INFO("level " << p);
    CHECK_THAT(oracle::empirical_cdf(draws, q), WithinAbs(p, 3.0 * se));
  }
}

TEST_CASE("confidence band geometry", "[inference]") {
  const auto c = flat_curve(10, 100.0);
  const auto band = confidence_band(c, 1.0, 0.1);
  CHECK(band.q_value == max_abs_brownian_quantile(0.9));
  CHECK(band.half_width == band.q_value / 10.0);
  CHECK(band.level == 0.9);
  CHECK(band.upper(3) - band.lower(3) == 2 * band.half_width);

  const auto wider_sample = flat_curve(10, 400.0);
  CHECK_THAT(confidence_band(wider_sample, 1.0, 0.1).half_width, WithinAbs(band.half_width / 2.0, 1e-15));
  CHECK(confidence_band(flat_curve(500, 100.0), 1.0, 0.1).half_width == band.half_width);

  CHECK_THROWS_AS(confidence_band(c, 0.0, 0.1), estimation_error);
  CHECK_THROWS_AS(confidence_band(c, -1.0, 0.1), estimation_error);
  CHECK_THROWS_AS(confidence_band(c, 1.0, 1.5), config_error);
}

TEST_CASE("KS test against the band", "[inference]") {
  const auto c = flat_curve(20, 50.0);
  const auto band = confidence_band(c, 2.0, 0.1);
  const auto same = ks_test(band, c.values);
  CHECK_FALSE(same.reject);
  CHECK(same.sup_violation == -band.half_width);

  std::vector<double> off = c.values;
  for (double& v : off)
    v += 2.0 * band.half_width;
  CHECK(ks_test(band, off).reject);

  std::vector<double> one_out = c.values;
  one_out[7] += 1.01 * band.half_width;
  const auto r = ks_test(band, one_out);
  CHECK(r.reject);
  CHECK(r.sup_violation > 0.0);

  const auto fn = ks_test(band, [&](double t) { return std::sin(t); });
  CHECK_FALSE(fn.reject);
  CHECK_THROWS_AS(ks_test(band, std::vector<double>{1.0}), config_error);
}

TEST_CASE("rejection and coverage are dual", "[inference]") {
  const auto m = LevyModel::gamma(30.0, 1.0);
  std::vector<double> grid;
  for (int i = 0; i < 128; ++i)
    grid.push_back(-1.0 + 6.0 * i / 127.0);
  const auto truth = true_N_curve(m, ClipFunction{}, grid);
  int rejects = 0;
  for (std::uint64_t r = 0; r < 40; ++r) {
    const auto s = sample_increments(m, 2000, 0.01, 3, r);
    const auto band = confidence_band(direct_N(s, ClipFunction{}, grid), direct_band_scale(s), 0.1);
    bool covered = true;
    for (std::size_t i = 0; i < grid.size(); ++i)
      covered = covered && band.lower(i) <= truth[i] && truth[i] <= band.upper(i);
    const bool reject = ks_test(band, truth).reject;
    CHECK(reject == !covered);
    rejects += reject;
  }
  CHECK(rejects > 0);
}

TEST_CASE("coverage report bookkeeping", "[inference]") {
  CoverageReport r;
  r.reps = 10;
  r.hits = 7;
  r.failures = 1;
  r.finalize();
  CHECK(r.coverage == 0.7);
  CHECK(r.misses() == 2);
  CHECK(r.failure_rate == 0.1);
  CHECK_THAT(r.mc_stderr, WithinAbs(std::sqrt(0.7 * 0.3 / 10), 1e-15));
}
