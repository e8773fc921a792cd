// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "levylab/levylab.hpp"
#include "oracles/brownian_max_mc.hpp"

using namespace levylab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %-34s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

ExperimentConfig paper_setup(const LevyModel& model) {
  ExperimentConfig c;
  c.model = model;
  c.methods = {Method::spectral, Method::direct};
  c.n = 2000;
  c.delta = 0.01;
  c.reps = 500;
  c.level = 0.9;
  c.base_seed = 1;
  return c;
}

const CoverageReport& report_for(const CoverageRun& run, Method m) {
  for (const auto& r : run.reports)
    if (r.method == m)
      return r;
  throw std::logic_error("method missing from coverage run");
}

void coverage_criteria() {
  const auto gamma_run = run_coverage(paper_setup(LevyModel::gamma(30.0, 1.0)));
  const auto& gs = report_for(gamma_run, Method::spectral);
  const auto& gd = report_for(gamma_run, Method::direct);
  report(gs.coverage >= 0.80 && gs.coverage <= 0.92 && gs.failures == 0, "coverage_gamma_spectral",
         format("coverage %.3f (se %.3f, failures %zu) in [0.80, 0.92]", gs.coverage, gs.mc_stderr, gs.failures));
  report(gd.coverage >= 0.50 && gd.coverage <= 0.68 && gd.coverage < gs.coverage, "coverage_gamma_direct",
         format("coverage %.3f (se %.3f) in [0.50, 0.68] and below spectral %.3f", gd.coverage, gd.mc_stderr,
                gs.coverage));

  const auto nig_run = run_coverage(paper_setup(LevyModel::nig(1.5, 0.1, 0.5)));
  const auto& ns = report_for(nig_run, Method::spectral);
  const auto& nd = report_for(nig_run, Method::direct);
  const auto in_band = [](const CoverageReport& r) { return r.coverage >= 0.86 && r.coverage <= 0.97 && r.failures == 0; };
  report(in_band(ns) && in_band(nd), "coverage_nig_both",
         format("spectral %.3f, direct %.3f, each in [0.86, 0.97]", ns.coverage, nd.coverage));
}

void bias_criterion() {
  ExperimentConfig c = paper_setup(LevyModel::gamma(30.0, 1.0));
  c.methods = {Method::direct};
  c.reps = 100;
  c.deltas = {0.01, 0.001};
  c.hold_n_delta = true;
  c.probe_t = 3.0;
  const auto rows = run_bias_sweep(c);
  const BiasRow& coarse = rows.at(0);
  const BiasRow& fine = rows.at(1);
  const bool ok = coarse.mean_probe_error > 0.0 && fine.sup_mean_bias <= 0.5 * coarse.sup_mean_bias;
  report(ok, "bias_direction_gamma_direct",
         format("mean error at t=3: %+.4f; sup-bias %.4f (delta=0.001) vs %.4f (delta=0.01)",
                coarse.mean_probe_error, fine.sup_mean_bias, coarse.sup_mean_bias));
}

void oracle_criterion() {
  const LevyModel gamma = LevyModel::gamma(30.0, 1.0);
  double worst = 0.0;
  for (double h : {std::sqrt(0.01), 0.05}) {
    const auto u = frequency_grid(h, SpectralConfig{}.u_points);
    const auto psi = psi_dd_hat(model_cf_with_derivatives(gamma, 0.01, u), 0.01, 1e-12);
    for (std::size_t j = 0; j < u.size(); ++j) {
      const std::complex<double> expect = -30.0 / std::pow(std::complex<double>(1.0, -u[j]), 2);
      worst = std::max(worst, std::abs(psi.values[j] - expect));
    }
  }
  SpectralConfig cfg;
  cfg.h = 0.05;
  const auto density = spectral_density_from_model(gamma, 0.01, cfg);
  const double n1 = spectral_N(density, ClipFunction{}, {1.0}, 2000, 0.01).values[0];
  const double target = 30.0 * (1.0 - 2.0 * std::exp(-1.0));
  report(worst <= 1e-10 && std::abs(n1 - target) <= 2e-2, "oracle_pipeline_exactness",
         format("max |psi'' error| %.2e <= 1e-10; N(1) = %.5f vs %.5f (|diff| %.2e <= 2e-2)", worst, n1, target,
                std::abs(n1 - target)));
}

void drift_criterion() {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> gamma_dist(-5.0, 5.0);
  const std::vector<LevyModel> models{LevyModel::gamma(30.0, 1.0), LevyModel::nig(1.5, 0.1, 0.5),
                                      LevyModel::compound_poisson_gauss(2.0, 0.0, 1.0, 0.5)};
  std::vector<double> grid;
  for (int i = 0; i < 512; ++i)
    grid.push_back(-8.0 + 16.0 * i / 511.0);
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const LevyModel& m = models[r % models.size()];
    IncrementSample s = sample_increments(m, 2000, 0.01, 77, r);
    SpectralConfig cfg;
    cfg.sigma = SigmaKnown{m.sigma2};
    const auto base = spectral_N(s, cfg, ClipFunction{}, grid);
    const double g = gamma_dist(eng);
    for (double& x : s.increments)
      x -= s.delta * g;
    const auto shifted = spectral_N(s, cfg, ClipFunction{}, grid);
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      scale = std::max(scale, std::abs(base.values[i]));
      diff = std::max(diff, std::abs(base.values[i] - shifted.values[i]));
    }
    worst = std::max(worst, diff / scale);
  }
  report(worst <= 1e-9, "drift_invariance", format("max relative sup difference %.2e over 100 samples <= 1e-9", worst));
}

void quantile_criterion() {
  const std::size_t paths = 1000000, steps = 10000;
  const auto draws = oracle::simulate_max_abs_brownian(paths, steps, 31337);
  std::string detail;
  bool ok = true;
  for (double p : {0.5, 0.9, 0.95, 0.99}) {
    const double q = max_abs_brownian_quantile(p);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(paths));
    const double emp = oracle::empirical_cdf(draws, q);
    const double z = (emp - p) / se;
    ok = ok && std::abs(z) <= 3.0;
    detail += format("q(%.2f)=%.5f z=%+.2f; ", p, q, z);
  }
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> level(0.01, 0.99);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double p = level(eng);
    worst = std::max(worst, std::abs(max_abs_brownian_cdf(max_abs_brownian_quantile(p)) - p));
  }
  worst = std::max(worst, std::abs(max_abs_brownian_quantile(max_abs_brownian_cdf(1.0)) - 1.0));
  ok = ok && worst <= 1e-9;
  report(ok, "quantile_correctness", detail + format("round-trip %.1e <= 1e-9", worst));
}

void moment_criterion() {
  const double delta = 1e-3;
  const auto s = sample_increments(LevyModel::gamma(30.0, 1.0), 1000000, delta, 5);
  double acc = 0.0;
  for (double x : s.increments)
    acc += x * x;
  const double value = acc / static_cast<double>(s.size()) / delta;
  const double rel = std::abs(value - 30.0) / 30.0;
  report(rel < 0.05, "moment_diagnostic", format("mean(X^2)/delta = %.4f, relative deviation %.4f < 0.05", value, rel));
}

std::string slurp(const fs::path& p) { return io::read_text(p.string()); }

void determinism_criterion(const char* exe) {
  const fs::path dir = fs::temp_directory_path() / "levylab_acceptance";
  fs::create_directories(dir);
  const std::string config = (dir / "config.json").string();
  ExperimentConfig c = paper_setup(LevyModel::nig(1.5, 0.1, 0.5));
  c.reps = 40;
  c.deltas = {0.01, 0.005};
  io::write_text(config, config_to_json(c).dump(2) + "\n");

  auto run = [&](const std::string& tag, int threads) {
    const fs::path out = dir / tag;
    fs::create_directories(out);
    const std::string base = std::string(exe) + " ";
    const std::string t = " --threads " + std::to_string(threads);
    const std::vector<std::string> cmds{
        base + "coverage --config " + config + t + " --out " + (out / "coverage.json").string() +
            " --replications " + (out / "reps.csv").string(),
        base + "figure --config " + config + t + " --reps 8 --out " + (out / "figure.csv").string() + " --svg " +
            (out / "figure.svg").string(),
        base + "bias-sweep --config " + config + t + " --reps 10 --out " + (out / "bias.csv").string()};
    for (const auto& cmd : cmds)
      if (std::system((cmd + " >/dev/null 2>&1").c_str()) != 0)
        return false;
    return true;
  };
  bool ok = run("t1", 1) && run("t8", 8) && run("t1_again", 1);
  std::size_t compared = 0;
  if (ok) {
    for (const auto& entry : fs::directory_iterator(dir / "t1")) {
      const auto name = entry.path().filename();
      const std::string ref = slurp(entry.path());
      ok = ok && !ref.empty() && ref == slurp(dir / "t8" / name) && ref == slurp(dir / "t1_again" / name);
      ++compared;
    }
  }
  report(ok && compared >= 7, "determinism_threads",
         format("%zu output files byte-identical across 1 thread, 8 threads and a re-run", compared));
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path to levy_lab>\n");
    return 2;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    coverage_criteria();
    bias_criterion();
    oracle_criterion();
    drift_criterion();
    quantile_criterion();
    moment_criterion();
    determinism_criterion(argv[1]);
  } catch (const std::exception& e) {
    report(false, "unexpected_exception", e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed (%.0f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
