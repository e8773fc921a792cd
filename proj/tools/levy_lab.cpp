// levy_lab: command-line front end for the levylab library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levylab/levylab.hpp"

using namespace levylab;

namespace {

constexpr int exit_config = 2;
constexpr int exit_estimation = 3;

// Where the increments come from: a k,x CSV file or a fresh simulation.
struct SampleOptions {
  std::string input;
  std::string model = "gamma:c=30,lambda=1";
  std::size_t n = 2000;
  double delta = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;

  void add(CLI::App* app) {
    app->add_option("--input", input, "CSV of increments (header k,x); simulates when omitted");
    app->add_option("--model", model, "model spec, e.g. gamma:c=30,lambda=1");
    app->add_option("--n", n, "number of increments")->check(CLI::PositiveNumber);
    app->add_option("--delta", delta, "sampling interval");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--stream", stream, "stream id under the base seed");
  }

  IncrementSample load() const {
    if (input.empty())
      return sample_increments(parse_model(model), n, delta, seed, stream);
    std::istringstream is(io::read_text(input));
    IncrementSample s;
    s.increments = io::read_increments_csv(is);
    s.delta = delta;
    s.model_tag = "file:" + input;
    s.validate();
    return s;
  }
};

struct GridOptions {
  std::optional<double> lo, hi;
  std::size_t points = 512;

  void add(CLI::App* app) {
    app->add_option("--lo", lo, "grid lower end");
    app->add_option("--hi", hi, "grid upper end");
    app->add_option("--points", points, "grid size")->check(CLI::Range(2, 10000000));
  }

  // Unset ends fall back to `fallback`.
  std::vector<double> build(const GridSpec& fallback) const {
    return GridSpec{lo.value_or(fallback.lo), hi.value_or(fallback.hi), points}.build();
  }
};

struct SpectralOptions {
  std::optional<double> h;
  double c_flat = 0.5;
  double x_range = 8.0;
  std::size_t x_points = 8192;
  std::size_t u_points = 4096;
  std::string sigma = "zero";
  double c0 = 1.0 / 6.0;
  double sigma_max = 1.0;
  double cf_floor = 1e-12;

  void add(CLI::App* app) {
    app->add_option("--h", h, "bandwidth (default sqrt(delta))");
    app->add_option("--c-flat", c_flat, "flat part of the kernel transform");
    app->add_option("--x-range", x_range, "spatial grid half-width A");
    app->add_option("--x-points", x_points, "spatial grid size (power of two)");
    app->add_option("--u-points", u_points, "frequency grid size (even)");
    app->add_option("--sigma", sigma, "zero | estimate | known:<sigma2>");
    app->add_option("--c0", c0, "constant in the sigma2 pilot frequency");
    app->add_option("--sigma-max", sigma_max, "upper bound on sigma for the pilot frequency");
    app->add_option("--cf-floor", cf_floor, "floor on |phi| in the ratio identity");
  }

  SpectralConfig config() const {
    SpectralConfig c;
    c.h = h;
    c.c_flat = c_flat;
    c.x_range = x_range;
    c.x_points = x_points;
    c.u_points = u_points;
    c.sigma = parse_sigma_mode(sigma);
    c.c0 = c0;
    c.sigma_max = sigma_max;
    c.cf_floor = cf_floor;
    c.validate();
    return c;
  }
};

struct EstimateOptions {
  SampleOptions sample;
  GridOptions grid;
  SpectralOptions spectral;
  std::string method = "spectral";
  std::string target = "N";
  std::string clip = "min_one_inv_x2";
  double zeta = 0.1;
  std::string out = "-";
  std::string sidecar;

  void add(CLI::App* app) {
    sample.add(app);
    grid.add(app);
    spectral.add(app);
    app->add_option("--method", method, "direct | spectral");
    app->add_option("--target", target, "N | calN");
    app->add_option("--clip", clip, "min_one_inv_x2 | rational");
    app->add_option("--zeta", zeta, "exclusion radius around 0 for calN");
    app->add_option("--out", out, "output CSV ('-' for stdout)");
    app->add_option("--sidecar", sidecar, "JSON sidecar path (default <out>.json when --out is a file)");
  }

  std::string sidecar_path() const {
    if (!sidecar.empty())
      return sidecar;
    return out.empty() || out == "-" ? std::string{} : out + ".json";
  }
};

struct Estimated {
  IncrementSample sample;
  EstimateCurve curve;
  double d = 0.0;
  json diagnostics = json::object();
};

// calN grids drop points inside (-zeta, zeta).
std::vector<double> outside_zeta(std::vector<double> grid, double zeta) {
  std::erase_if(grid, [&](double t) { return std::abs(t) < zeta; });
  if (grid.empty())
    throw config_error("no grid point lies outside (-zeta, zeta)");
  return grid;
}

Estimated run_estimate(const EstimateOptions& o) {
  Estimated e;
  e.sample = o.sample.load();
  const Method method = parse_method(o.method);
  const Target target = parse_target(o.target);
  const ClipFunction clip = ClipFunction::parse(o.clip);
  GridSpec fallback = default_grid(e.sample, o.grid.points);
  std::vector<double> grid;
  std::optional<SpectralDensity> density;
  if (method == Method::spectral) {
    const SpectralConfig cfg = o.spectral.config();
    fallback.lo = std::max(fallback.lo, -cfg.x_range);
    fallback.hi = std::min(fallback.hi, cfg.x_range);
    grid = o.grid.build(fallback);
    density = spectral_density_on_grid(e.sample, cfg);
    e.diagnostics = density_diagnostics(*density);
    const auto scale = spectral_band_scale_detail(*density);
    e.d = scale.value;
    e.diagnostics["clipped_fraction"] = scale.clipped_fraction;
    e.diagnostics["spectral"] = spectral_to_json(cfg);
  } else {
    grid = o.grid.build(fallback);
    e.d = direct_band_scale(e.sample);
  }
  if (target == Target::calN) {
    grid = outside_zeta(std::move(grid), o.zeta);
    e.curve = method == Method::direct
                  ? direct_calN(e.sample, o.zeta, grid)
                  : spectral_calN(*density, o.zeta, grid, e.sample.size(), e.sample.delta);
  } else {
    e.curve = method == Method::direct
                  ? direct_N(e.sample, clip, grid)
                  : spectral_N(*density, clip, grid, e.sample.size(), e.sample.delta);
  }
  e.diagnostics["method"] = to_string(method);
  e.diagnostics["target"] = to_string(target);
  e.diagnostics["clip"] = clip.name();
  e.diagnostics["n"] = e.sample.size();
  e.diagnostics["delta"] = e.sample.delta;
  e.diagnostics["sample"] = e.sample.model_tag;
  e.diagnostics["seed"] = e.sample.seed;
  e.diagnostics["stream"] = e.sample.stream;
  e.diagnostics["band_scale"] = e.d;
  return e;
}

void write_sidecar(const std::string& path, const json& j) {
  if (!path.empty())
    io::write_text(path, j.dump(2) + "\n");
}

// Worker count is left out so outputs do not depend on how the run was scheduled.
json recorded_config(const ExperimentConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("threads");
  return j;
}

// Experiment subcommands share a config file plus flag overrides.
struct ExperimentOptions {
  std::string config_path;
  std::string model;
  std::vector<std::string> methods;
  std::optional<std::size_t> n, reps, threads;
  std::optional<double> delta, level, probe_t;
  std::optional<std::uint64_t> seed;
  std::optional<double> lo, hi;
  std::optional<std::size_t> points;
  std::optional<std::string> sigma, clip;
  std::optional<double> h;
  std::vector<double> deltas, bandwidths;
  bool oracle = false;
  bool for_figure = false;
  std::string out = "-";
  std::string sidecar;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "JSON experiment config");
    app->add_option("--model", model, "model spec");
    app->add_option("--method", methods, "direct and/or spectral (repeatable)");
    app->add_option("--n", n, "increments per replication");
    app->add_option("--delta", delta, "sampling interval");
    app->add_option("--reps", reps, "replications");
    app->add_option("--level", level, "target coverage of the band");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--threads", threads, "worker threads (0: all cores)");
    app->add_option("--lo", lo, "grid lower end");
    app->add_option("--hi", hi, "grid upper end");
    app->add_option("--points", points, "grid size");
    app->add_option("--clip", clip, "min_one_inv_x2 | rational");
    app->add_option("--sigma", sigma, "zero | estimate | known:<sigma2>");
    app->add_option("--h", h, "spectral bandwidth");
    app->add_option("--out", out, "output path ('-' for stdout)");
    app->add_option("--sidecar", sidecar, "resolved-config JSON path (default <out>.json)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (!model.empty())
      c.model = parse_model(model);
    if (!methods.empty()) {
      c.methods.clear();
      for (const auto& m : methods)
        c.methods.push_back(parse_method(m));
    }
    if (n) c.n = *n;
    if (delta) c.delta = *delta;
    if (reps)
      c.reps = *reps;
    else if (for_figure && config_path.empty())
      c.reps = 50;
    if (level) c.level = *level;
    if (seed) c.base_seed = *seed;
    if (threads) c.threads = *threads;
    if (lo || hi || points) {
      GridSpec g = for_figure ? c.figure_grid() : c.resolved_grid();
      c.grid = GridSpec{lo.value_or(g.lo), hi.value_or(g.hi), points.value_or(g.points)};
    }
    if (clip) c.clip = ClipFunction::parse(*clip);
    if (sigma) c.spectral.sigma = parse_sigma_mode(*sigma);
    if (h) c.spectral.h = *h;
    if (!deltas.empty()) c.deltas = deltas;
    if (!bandwidths.empty()) c.bandwidths = bandwidths;
    if (oracle) c.oracle = true;
    if (probe_t) c.probe_t = *probe_t;
    c.validate();
    return c;
  }

  std::string sidecar_path() const {
    if (!sidecar.empty())
      return sidecar;
    return out.empty() || out == "-" ? std::string{} : out + ".json";
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jump-measure estimation from discretely observed Levy increments"};
  app.require_subcommand(1);
  // --h is the bandwidth, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");

  // simulate
  SampleOptions sim;
  std::string sim_out = "-";
  auto* simulate = app.add_subcommand("simulate", "draw increments and write k,x CSV");
  sim.add(simulate);
  simulate->add_option("--out", sim_out, "output CSV ('-' for stdout)");

  // truth
  std::string truth_model = "gamma:c=30,lambda=1", truth_clip = "min_one_inv_x2", truth_target = "N";
  std::string truth_out = "-";
  double truth_tol = 1e-9, truth_zeta = 0.1;
  GridOptions truth_grid;
  auto* truth = app.add_subcommand("truth", "true N (or tail function) of a model on a grid");
  truth->add_option("--model", truth_model, "model spec");
  truth->add_option("--clip", truth_clip, "min_one_inv_x2 | rational");
  truth->add_option("--target", truth_target, "N | calN");
  truth->add_option("--tol", truth_tol, "quadrature tolerance");
  truth->add_option("--zeta", truth_zeta, "exclusion radius around 0 for calN");
  truth->add_option("--out", truth_out, "output CSV ('-' for stdout)");
  truth_grid.add(truth);

  // estimate / band / test
  EstimateOptions est_opts, band_opts, test_opts;
  double band_level = 0.9, test_level = 0.9;
  std::string null_model;
  auto* estimate = app.add_subcommand("estimate", "estimate N or the tail function");
  est_opts.add(estimate);
  auto* band = app.add_subcommand("band", "confidence band around the N estimate");
  band_opts.add(band);
  band->add_option("--level", band_level, "target coverage (alpha = 1 - level)");
  auto* test = app.add_subcommand("test", "test a hypothesised model against the band");
  test_opts.add(test);
  test->add_option("--level", test_level, "target coverage (alpha = 1 - level)");
  test->add_option("--null-model", null_model, "hypothesised model spec")->required();

  // experiments
  ExperimentOptions cov_opts, fig_opts, bias_opts;
  fig_opts.for_figure = true;
  std::string replications_out, svg_out;
  auto* coverage = app.add_subcommand("coverage", "Monte-Carlo coverage of the bands");
  cov_opts.add(coverage);
  coverage->add_option("--replications", replications_out, "per-replication CSV");
  auto* figure = app.add_subcommand("figure", "overlay data: estimates, truth and one band");
  fig_opts.add(figure);
  figure->add_option("--svg", svg_out, "optional SVG rendering");
  auto* bias = app.add_subcommand("bias-sweep", "sup-bias against delta and bandwidth");
  bias_opts.add(bias);
  bias->add_option("--deltas", bias_opts.deltas, "sampling intervals");
  bias->add_option("--bandwidths", bias_opts.bandwidths, "spectral bandwidths");
  bias->add_option("--probe-t", bias_opts.probe_t, "point for the signed-error column");
  bias->add_flag("--oracle", bias_opts.oracle, "spectral rows from the exact characteristic function");

  // quantile
  std::optional<double> q_level, q_cdf;
  auto* quantile = app.add_subcommand("quantile", "quantile or CDF of max |B| on [0, 1]");
  auto* level_opt = quantile->add_option("--level", q_level, "probability in (0, 1)");
  quantile->add_option("--cdf", q_cdf, "evaluate the CDF at this point")->excludes(level_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*simulate) {
      const IncrementSample s = sim.load();
      std::ostringstream os;
      io::write_increments_csv(os, s);
      io::write_text(sim_out, os.str());
    } else if (*truth) {
      const LevyModel m = parse_model(truth_model);
      const ClipFunction clip = ClipFunction::parse(truth_clip);
      std::vector<double> grid = truth_grid.build(GridSpec{});
      std::vector<double> values;
      std::string header = "N_true";
      if (parse_target(truth_target) == Target::calN) {
        grid = outside_zeta(std::move(grid), truth_zeta);
        for (double t : grid)
          values.push_back(true_calN(m, t, truth_tol));
        header = "calN_true";
      } else {
        values = true_N_curve(m, clip, grid, truth_tol);
      }
      std::ostringstream os;
      io::write_curve_csv(os, grid, values, header);
      io::write_text(truth_out, os.str());
    } else if (*estimate) {
      const Estimated e = run_estimate(est_opts);
      std::ostringstream os;
      io::write_curve_csv(os, e.curve.grid, e.curve.values);
      io::write_text(est_opts.out, os.str());
      write_sidecar(est_opts.sidecar_path(), e.diagnostics);
    } else if (*band) {
      band_opts.target = "N";
      const Estimated e = run_estimate(band_opts);
      const BandResult b = confidence_band(e.curve, e.d, 1.0 - band_level);
      std::ostringstream os;
      io::write_band_csv(os, b);
      io::write_text(band_opts.out, os.str());
      json side = e.diagnostics;
      side["level"] = b.level;
      side["q"] = b.q_value;
      side["half_width"] = b.half_width;
      write_sidecar(band_opts.sidecar_path(), side);
    } else if (*test) {
      test_opts.target = "N";
      const Estimated e = run_estimate(test_opts);
      const BandResult b = confidence_band(e.curve, e.d, 1.0 - test_level);
      const LevyModel h0 = parse_model(null_model);
      const auto r = ks_test(b, true_N_curve(h0, e.curve.clip, e.curve.grid));
      const json j{{"reject", r.reject}, {"sup_violation", r.sup_violation}, {"half_width", b.half_width}};
      io::write_text(test_opts.out, j.dump(2) + "\n");
    } else if (*coverage) {
      const ExperimentConfig cfg = cov_opts.resolve();
      const CoverageRun run = run_coverage(cfg);
      const json reports = coverage_to_json(run);
      io::write_text(cov_opts.out, reports.dump(2) + "\n");
      if (!replications_out.empty())
        io::write_text(replications_out, coverage_replications_csv(cfg, run));
      write_sidecar(cov_opts.sidecar_path(), json{{"config", recorded_config(cfg)}, {"reports", reports}});
    } else if (*figure) {
      const ExperimentConfig cfg = fig_opts.resolve();
      const FigureData fig = run_figure(cfg);
      io::write_text(fig_opts.out, figure_csv(fig));
      if (!svg_out.empty())
        io::write_text(svg_out, figure_svg(fig));
      write_sidecar(fig_opts.sidecar_path(), json{{"config", recorded_config(cfg)}});
    } else if (*bias) {
      const ExperimentConfig cfg = bias_opts.resolve();
      io::write_text(bias_opts.out, bias_sweep_csv(run_bias_sweep(cfg)));
      write_sidecar(bias_opts.sidecar_path(), json{{"config", recorded_config(cfg)}});
    } else if (*quantile) {
      if (q_cdf) {
        std::printf("%s\n", io::fmt(max_abs_brownian_cdf(*q_cdf)).c_str());
      } else {
        if (!q_level)
          throw config_error("quantile needs --level or --cdf");
        std::printf("%s\n", io::fmt(max_abs_brownian_quantile(*q_level)).c_str());
      }
    }
  } catch (const config_error& e) {
    std::fprintf(stderr, "levy_lab: configuration error: %s\n", e.what());
    return exit_config;
  } catch (const domain_error& e) {
    std::fprintf(stderr, "levy_lab: domain error: %s\n", e.what());
    return exit_config;
  } catch (const estimation_error& e) {
    std::fprintf(stderr, "levy_lab: estimation failed: %s\n", e.what());
    return exit_estimation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "levy_lab: %s\n", e.what());
    return 1;
  }
  return 0;
}
