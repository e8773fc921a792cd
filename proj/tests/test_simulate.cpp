#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "levylab/random.hpp"
#include "levylab/simulate.hpp"

using namespace levylab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Moments {
  double mean, var;
};

Moments moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs)
    ss += (x - mean) * (x - mean);
  return {mean, ss / (n - 1.0)};
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t)
      ++i;
    while (j < b.size() && b[j] <= t)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

} // namespace

TEST_CASE("Philox4x32-10 known-answer vectors", "[random]") {
  using B = Philox4x32::block_type;
  using K = Philox4x32::key_type;
  CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and distinct", "[random]") {
  Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  CHECK(seen.size() == 3000);
}

TEST_CASE("uniform_open01 stays inside (0, 1) with the right mean", "[random]") {
  Philox4x32 eng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform_open01(eng);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK_THAT(sum / n, WithinAbs(0.5, 4.0 * std::sqrt(1.0 / 12.0 / n)));
}

TEST_CASE("sampling is deterministic per (model, n, delta, seed, stream)", "[simulate]") {
  const auto m = LevyModel::nig(1.5, 0.1, 0.5);
  const auto a = sample_increments(m, 500, 0.01, 9, 3);
  const auto b = sample_increments(m, 500, 0.01, 9, 3);
  const auto c = sample_increments(m, 500, 0.01, 9, 4);
  CHECK(a.increments == b.increments);
  CHECK(a.increments != c.increments);
  CHECK(a.seed == 9);
  CHECK(a.stream == 3);
  CHECK(a.model_tag == to_string(m));
}

TEST_CASE("Gamma increments have mean c delta / lambda", "[simulate]") {
  const std::size_t n = 2000;
  const auto s = sample_increments(LevyModel::gamma(30.0, 1.0), n, 0.01, 5);
  const double mean = moments(s.increments).mean;
  // Gamma(0.3, 1): variance 0.3.
  CHECK_THAT(mean, WithinAbs(0.3, 4.0 * std::sqrt(0.3 / n)));
  for (double x : s.increments)
    CHECK(x >= 0.0);
}

TEST_CASE("Gamma shape-boosting sampler matches Gamma moments for small shapes", "[simulate]") {
  Philox4x32 eng(11);
  for (double shape : {0.05, 0.3, 0.9}) {
    std::vector<double> xs(200000);
    for (double& x : xs)
      x = detail::gamma_unit(eng, shape);
    const auto mo = moments(xs);
    INFO("shape " << shape);
    CHECK_THAT(mo.mean, WithinAbs(shape, 4.0 * std::sqrt(shape / xs.size())));
    CHECK_THAT(mo.var, WithinRel(shape, 0.05));
  }
}

TEST_CASE("degenerate Brownian sample is identically zero", "[simulate]") {
  const auto s = sample_increments(LevyModel::brownian(0.0), 100, 0.3, 1);
  for (double x : s.increments)
    CHECK(x == 0.0);
}

TEST_CASE("inverse Gaussian subordinator has mean delta and variance kappa delta", "[simulate]") {
  Philox4x32 eng(3);
  std::normal_distribution<double> normal;
  const double delta = 0.01, kappa = 0.5;
  std::vector<double> xs(400000);
  for (double& x : xs)
    x = detail::inverse_gaussian(eng, normal, delta, delta * delta / kappa);
  const auto mo = moments(xs);
  CHECK_THAT(mo.mean, WithinAbs(delta, 4.0 * std::sqrt(kappa * delta / xs.size())));
  CHECK_THAT(mo.var, WithinRel(kappa * delta, 0.05));
}

TEST_CASE("NIG increments have subordinated-diffusion moments", "[simulate]") {
  const std::size_t n = 100000;
  const double delta = 0.01, s = 1.5, theta = 0.1, kappa = 0.5;
  const auto mo = moments(sample_increments(LevyModel::nig(s, theta, kappa), n, delta, 17).increments);
  const double var = (s * s + theta * theta * kappa) * delta;
  CHECK_THAT(mo.mean, WithinAbs(theta * delta, 4.0 * std::sqrt(var / n)));
  // The variance estimate is noisy for a heavy-kurtosis law; the fourth
  // moment of the increment gives its standard error.
  CHECK_THAT(mo.var, WithinRel(var, 0.05));
}

TEST_CASE("compound Poisson Gauss increments", "[simulate]") {
  const std::size_t n = 200000;
  const double delta = 0.1;
  const auto m = LevyModel::compound_poisson_gauss(2.0, 0.5, 1.0, 0.25, 1.0);
  const auto mo = moments(sample_increments(m, n, delta, 2).increments);
  const double mean = (1.0 + 2.0 * 0.5) * delta;
  const double var = (0.25 + 2.0 * (0.25 + 1.0)) * delta;
  CHECK_THAT(mo.mean, WithinAbs(mean, 4.0 * std::sqrt(var / n)));
  CHECK_THAT(mo.var, WithinRel(var, 0.03));

  const auto none = sample_increments(LevyModel::compound_poisson_gauss(0.0, 0.0, 1.0), 50, 0.1, 1);
  for (double x : none.increments)
    CHECK(x == 0.0);
}

TEST_CASE("sums of two delta-increments match 2 delta-increments", "[simulate]") {
  const std::size_t n = 100000;
  const double critical = 1.358 * std::sqrt(2.0 / n);
  for (const auto& m : {LevyModel::gamma(30.0, 1.0), LevyModel::nig(1.5, 0.1, 0.5),
                        LevyModel::compound_poisson_gauss(2.0, 0.0, 1.0, 1.0)}) {
    const auto fine = sample_increments(m, 2 * n, 0.01, 21);
    std::vector<double> pairs(n);
    for (std::size_t k = 0; k < n; ++k)
      pairs[k] = fine.increments[2 * k] + fine.increments[2 * k + 1];
    const auto coarse = sample_increments(m, n, 0.02, 22);
    INFO(to_string(m));
    CHECK(ks_two_sample(pairs, coarse.increments) < critical);
  }
}

TEST_CASE("second moment over delta approaches sigma2 + int x^2 nu", "[simulate]") {
  const auto m = LevyModel::compound_poisson_gauss(2.0, 0.0, 1.0, 0.5);
  const auto s = sample_increments(m, 400000, 0.001, 8);
  double acc = 0.0;
  for (double x : s.increments)
    acc += x * x;
  CHECK_THAT(acc / s.size() / s.delta, WithinRel(2.5, 0.05));
}

TEST_CASE("invalid sampling requests", "[simulate]") {
  CHECK_THROWS_AS(sample_increments(LevyModel::gamma(30.0, 1.0), 0, 0.01, 1), config_error);
  CHECK_THROWS_AS(sample_increments(LevyModel::gamma(30.0, 1.0), 10, 0.0, 1), config_error);
  CHECK_THROWS_AS(sample_increments(LevyModel::gamma(-1.0, 1.0), 10, 0.01, 1), config_error);
}
