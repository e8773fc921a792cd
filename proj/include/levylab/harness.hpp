#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "levylab/curve.hpp"
#include "levylab/errors.hpp"
#include "levylab/estimate_direct.hpp"
#include "levylab/estimate_spectral.hpp"
#include "levylab/inference.hpp"
#include "levylab/io.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/simulate.hpp"

namespace levylab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  LevyModel model = LevyModel::gamma(30.0, 1.0);
  std::vector<Method> methods{Method::spectral, Method::direct};
  std::size_t n = 2000;
  double delta = 0.01;
  std::size_t reps = 500;
  double level = 0.9;
  std::uint64_t base_seed = 1;
  std::optional<GridSpec> grid;  // per-model default when unset
  ClipFunction clip{};
  SpectralConfig spectral{};
  // Replication stream ids; empty means 0 .. reps-1.
  std::optional<std::vector<std::uint64_t>> seeds;
  // Bias sweep.
  std::vector<double> deltas;
  std::vector<double> bandwidths;
  bool hold_n_delta = true;  // keep n * delta fixed across the sweep
  bool oracle = false;       // spectral rows use the exact characteristic function
  double probe_t = 3.0;
  std::size_t threads = 0;   // 0: hardware concurrency

  void validate() const {
    using detail::require;
    model.validate();
    require(!methods.empty(), "at least one method is required");
    require(n >= 1, "n must be >= 1");
    require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
    require(reps >= 1, "reps must be >= 1");
    require(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    if (grid)
      grid->validate();
    spectral.validate();
    for (double d : deltas)
      require(std::isfinite(d) && d > 0.0, "deltas must be > 0");
    for (double h : bandwidths)
      require(std::isfinite(h) && h > 0.0, "bandwidths must be > 0");
    require(std::isfinite(probe_t), "probe_t must be finite");
  }

  std::vector<std::uint64_t> replication_streams() const {
    if (seeds)
      return *seeds;
    std::vector<std::uint64_t> s(reps);
    for (std::size_t r = 0; r < reps; ++r)
      s[r] = r;
    return s;
  }

  /// Grid for coverage and bias runs: the whole spectral x-range unless set.
  GridSpec resolved_grid() const {
    if (grid)
      return *grid;
    return {-spectral.x_range, spectral.x_range, 512};
  }

  /// Plotting grid: [-2, 2] for NIG and [-3, 3] otherwise unless set.
  GridSpec figure_grid() const {
    if (grid)
      return *grid;
    if (model.kind() == ModelKind::nig)
      return {-2.0, 2.0, 512};
    return {-3.0, 3.0, 512};
  }
};

// -- JSON -------------------------------------------------------------------

inline json model_to_json(const LevyModel& m) {
  json j{{"kind", to_string(m.kind())}};
  for (const auto& [k, v] : model_parameters(m))
    j[k] = v;
  return j;
}

inline LevyModel model_from_json(const json& j) {
  if (j.is_string())
    return parse_model(j.get<std::string>());
  detail::require(j.is_object() && j.contains("kind"), "model must be an object with a 'kind'");
  std::map<std::string, double> kv;
  for (const auto& [k, v] : j.items()) {
    if (k == "kind")
      continue;
    detail::require(v.is_number(), "model parameter '" + k + "' must be a number");
    kv[k] = v.get<double>();
  }
  return make_model(j.at("kind").get<std::string>(), kv);
}

inline json spectral_to_json(const SpectralConfig& c) {
  return json{{"h", c.h ? json(*c.h) : json(nullptr)},
              {"c_flat", c.c_flat},
              {"u_points", c.u_points},
              {"x_range", c.x_range},
              {"x_points", c.x_points},
              {"cf_floor", c.cf_floor},
              {"sigma", to_string(c.sigma)},
              {"c0", c.c0},
              {"sigma_max", c.sigma_max}};
}

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : known)
      ok = ok || k == name;
    if (!ok)
      throw config_error("unknown key '" + k + "' in " + where);
  }
}

} // namespace detail

inline SpectralConfig spectral_from_json(const json& j) {
  detail::require(j.is_object(), "spectral config must be an object");
  detail::reject_unknown_keys(
      j, {"h", "c_flat", "u_points", "x_range", "x_points", "cf_floor", "sigma", "c0", "sigma_max"},
      "spectral");
  SpectralConfig c;
  if (j.contains("h") && !j["h"].is_null())
    c.h = j["h"].get<double>();
  c.c_flat = j.value("c_flat", c.c_flat);
  c.u_points = j.value("u_points", c.u_points);
  c.x_range = j.value("x_range", c.x_range);
  c.x_points = j.value("x_points", c.x_points);
  c.cf_floor = j.value("cf_floor", c.cf_floor);
  if (j.contains("sigma"))
    c.sigma = parse_sigma_mode(j["sigma"].get<std::string>());
  c.c0 = j.value("c0", c.c0);
  c.sigma_max = j.value("sigma_max", c.sigma_max);
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods)
    methods.push_back(to_string(m));
  json j{{"model", model_to_json(c.model)},
         {"methods", methods},
         {"n", c.n},
         {"delta", c.delta},
         {"reps", c.reps},
         {"level", c.level},
         {"base_seed", c.base_seed},
         {"grid", c.grid ? json{{"lo", c.grid->lo}, {"hi", c.grid->hi}, {"points", c.grid->points}}
                         : json(nullptr)},
         {"clip", c.clip.name()},
         {"spectral", spectral_to_json(c.spectral)},
         {"seeds", c.seeds ? json(*c.seeds) : json(nullptr)},
         {"deltas", c.deltas},
         {"bandwidths", c.bandwidths},
         {"hold_n_delta", c.hold_n_delta},
         {"oracle", c.oracle},
         {"probe_t", c.probe_t},
         {"threads", c.threads}};
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  detail::require(j.is_object(), "config must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"model", "methods", "n", "delta", "reps", "level", "base_seed", "grid",
                               "clip", "spectral", "seeds", "deltas", "bandwidths", "hold_n_delta",
                               "oracle", "probe_t", "threads"},
                              "config");
  ExperimentConfig c;
  try {
    if (j.contains("model"))
      c.model = model_from_json(j["model"]);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"])
        c.methods.push_back(parse_method(m.get<std::string>()));
    }
    c.n = j.value("n", c.n);
    c.delta = j.value("delta", c.delta);
    c.reps = j.value("reps", c.reps);
    c.level = j.value("level", c.level);
    c.base_seed = j.value("base_seed", c.base_seed);
    if (j.contains("grid") && !j["grid"].is_null()) {
      const auto& g = j["grid"];
      detail::reject_unknown_keys(g, {"lo", "hi", "points"}, "grid");
      GridSpec spec;
      spec.lo = g.value("lo", spec.lo);
      spec.hi = g.value("hi", spec.hi);
      spec.points = g.value("points", spec.points);
      c.grid = spec;
    }
    if (j.contains("clip"))
      c.clip = ClipFunction::parse(j["clip"].get<std::string>());
    if (j.contains("spectral"))
      c.spectral = spectral_from_json(j["spectral"]);
    if (j.contains("seeds") && !j["seeds"].is_null())
      c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.deltas = j.value("deltas", c.deltas);
    c.bandwidths = j.value("bandwidths", c.bandwidths);
    c.hold_n_delta = j.value("hold_n_delta", c.hold_n_delta);
    c.oracle = j.value("oracle", c.oracle);
    c.probe_t = j.value("probe_t", c.probe_t);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw config_error(std::string("invalid config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw config_error("cannot parse '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Parallel replications
// ---------------------------------------------------------------------------

/// Worker count: `requested` (hardware concurrency when 0), capped by the
/// LEVY_LAB_THREADS environment variable when set.
inline std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LEVY_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1)
      n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, n);
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception is rethrown after join.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Single estimates
// ---------------------------------------------------------------------------

/// An N estimate together with its band scale d and spectral diagnostics.
struct ScaledEstimate {
  EstimateCurve curve;
  double d = 0.0;
  std::optional<SpectralDensity> density;  // spectral method only
  double clipped_fraction = 0.0;
};

inline ScaledEstimate estimate_N_with_scale(Method method, const IncrementSample& sample,
                                            const ExperimentConfig& cfg,
                                            const std::vector<double>& grid) {
  if (method == Method::direct)
    return {direct_N(sample, cfg.clip, grid), direct_band_scale(sample), std::nullopt, 0.0};
  SpectralDensity density = spectral_density_on_grid(sample, cfg.spectral);
  const auto scale = spectral_band_scale_detail(density);
  EstimateCurve curve = spectral_N(density, cfg.clip, grid, sample.size(), sample.delta);
  return {std::move(curve), scale.value, std::move(density), scale.clipped_fraction};
}

inline json density_diagnostics(const SpectralDensity& d) {
  return json{{"h", d.h},
              {"sigma2", d.sigma2},
              {"guarded_points", d.guarded},
              {"max_imag_residue", d.max_imag},
              {"max_real", d.max_real}};
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

struct ReplicationOutcome {
  bool hit = false;
  bool failed = false;
  double d = 0.0;
  double half_width = 0.0;
  double sup_error = 0.0;  // max over the grid of |estimate - truth|
  std::string failure;
};

struct CoverageRun {
  std::vector<CoverageReport> reports;                    // one per method
  std::vector<std::uint64_t> streams;                     // per replication
  std::vector<std::vector<ReplicationOutcome>> outcomes;  // [method][replication]
};

/// Whether the band around `curve` with scale d contains `truth` on every grid
/// point. A zero scale gives a zero-width band (only exact agreement is a hit).
inline ReplicationOutcome check_band(const EstimateCurve& curve, double d, double level,
                                     const std::vector<double>& truth) {
  ReplicationOutcome o;
  o.d = d;
  for (std::size_t i = 0; i < truth.size(); ++i)
    o.sup_error = std::max(o.sup_error, std::abs(curve.values[i] - truth[i]));
  if (d == 0.0) {
    o.hit = o.sup_error == 0.0;
    return o;
  }
  const BandResult band = confidence_band(curve, d, 1.0 - level);
  o.half_width = band.half_width;
  o.hit = !ks_test(band, truth).reject;
  return o;
}

inline CoverageRun run_coverage(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.resolved_grid().build();
  const std::vector<double> truth = true_N_curve(cfg.model, cfg.clip, grid);
  const auto streams = cfg.replication_streams();
  detail::require(!streams.empty(), "no replications to run");

  CoverageRun run;
  run.streams = streams;
  run.outcomes.assign(cfg.methods.size(), std::vector<ReplicationOutcome>(streams.size()));

  parallel_for(streams.size(), worker_count(cfg.threads), [&](std::size_t r) {
    const IncrementSample sample =
        sample_increments(cfg.model, cfg.n, cfg.delta, cfg.base_seed, streams[r]);
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      ReplicationOutcome& slot = run.outcomes[mi][r];
      try {
        const ScaledEstimate est = estimate_N_with_scale(cfg.methods[mi], sample, cfg, grid);
        slot = check_band(est.curve, est.d, cfg.level, truth);
      } catch (const estimation_error& e) {
        slot = ReplicationOutcome{};
        slot.failed = true;
        slot.failure = e.what();
      }
    }
  });

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    CoverageReport rep;
    rep.model = to_string(cfg.model);
    rep.method = cfg.methods[mi];
    rep.reps = streams.size();
    rep.n = cfg.n;
    rep.delta = cfg.delta;
    rep.level = cfg.level;
    double width_sum = 0.0;
    for (const auto& o : run.outcomes[mi]) {
      rep.hits += o.hit ? 1 : 0;
      rep.failures += o.failed ? 1 : 0;
      width_sum += o.half_width;
    }
    rep.finalize();
    const std::size_t ok = rep.reps - rep.failures;
    rep.mean_half_width = ok ? width_sum / static_cast<double>(ok) : 0.0;
    run.reports.push_back(rep);
  }
  return run;
}

inline json coverage_to_json(const CoverageRun& run) {
  json reports = json::array();
  for (const auto& r : run.reports) {
    reports.push_back(json{{"model", r.model},
                           {"method", to_string(r.method)},
                           {"reps", r.reps},
                           {"n", r.n},
                           {"delta", r.delta},
                           {"level", r.level},
                           {"hits", r.hits},
                           {"misses", r.misses()},
                           {"failures", r.failures},
                           {"coverage", r.coverage},
                           {"mc_stderr", r.mc_stderr},
                           {"failure_rate", r.failure_rate},
                           {"mean_half_width", r.mean_half_width}});
  }
  return reports;
}

inline std::string coverage_replications_csv(const ExperimentConfig& cfg, const CoverageRun& run) {
  std::ostringstream os;
  os << "rep,stream,method,hit,failed,d,half_width,sup_error\n";
  for (std::size_t r = 0; r < run.streams.size(); ++r)
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const auto& o = run.outcomes[mi][r];
      os << r << ',' << run.streams[r] << ',' << to_string(cfg.methods[mi]) << ',' << o.hit << ','
         << o.failed << ',' << io::fmt(o.d) << ',' << io::fmt(o.half_width) << ','
         << io::fmt(o.sup_error) << '\n';
    }
  return os.str();
}

// ---------------------------------------------------------------------------
// Figure data: many estimates, the truth and one highlighted band per method
// ---------------------------------------------------------------------------

struct FigurePanel {
  Method method = Method::direct;
  std::vector<std::vector<double>> curves;  // one per replication
  std::optional<BandResult> band;           // for the first replication
};

struct FigureData {
  std::vector<double> grid;
  std::vector<double> truth;
  std::vector<std::uint64_t> streams;
  std::vector<FigurePanel> panels;
};

inline FigureData run_figure(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto streams = cfg.replication_streams();
  if (streams.empty())
    throw config_error("figure needs at least one seed");
  FigureData fig;
  fig.grid = cfg.figure_grid().build();
  fig.truth = true_N_curve(cfg.model, cfg.clip, fig.grid);
  fig.streams = streams;
  for (Method m : cfg.methods)
    fig.panels.push_back({m, std::vector<std::vector<double>>(streams.size()), std::nullopt});

  parallel_for(streams.size(), worker_count(cfg.threads), [&](std::size_t r) {
    const IncrementSample sample =
        sample_increments(cfg.model, cfg.n, cfg.delta, cfg.base_seed, streams[r]);
    for (auto& panel : fig.panels) {
      ScaledEstimate est = estimate_N_with_scale(panel.method, sample, cfg, fig.grid);
      panel.curves[r] = est.curve.values;
      if (r == 0 && est.d > 0.0)
        panel.band = confidence_band(est.curve, est.d, 1.0 - cfg.level);
    }
  });
  return fig;
}

inline std::string figure_csv(const FigureData& fig) {
  std::ostringstream os;
  os << "series,t,value\n";
  for (std::size_t i = 0; i < fig.grid.size(); ++i)
    os << "truth," << io::fmt(fig.grid[i]) << ',' << io::fmt(fig.truth[i]) << '\n';
  for (const auto& panel : fig.panels) {
    const std::string name = to_string(panel.method);
    for (std::size_t r = 0; r < panel.curves.size(); ++r)
      for (std::size_t i = 0; i < fig.grid.size(); ++i)
        os << name << ':' << fig.streams[r] << ',' << io::fmt(fig.grid[i]) << ','
           << io::fmt(panel.curves[r][i]) << '\n';
    if (panel.band) {
      for (std::size_t i = 0; i < fig.grid.size(); ++i)
        os << name << ":lower," << io::fmt(fig.grid[i]) << ',' << io::fmt(panel.band->lower(i)) << '\n';
      for (std::size_t i = 0; i < fig.grid.size(); ++i)
        os << name << ":upper," << io::fmt(fig.grid[i]) << ',' << io::fmt(panel.band->upper(i)) << '\n';
    }
  }
  return os.str();
}

/// Side-by-side SVG panels: light estimates, black truth, the first estimate
/// in blue with its dashed band.
inline std::string figure_svg(const FigureData& fig) {
  constexpr double pw = 420, ph = 260, pad = 30;
  const double width = pw * static_cast<double>(fig.panels.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << ph
     << "\">\n";
  for (std::size_t p = 0; p < fig.panels.size(); ++p) {
    const auto& panel = fig.panels[p];
    double lo = *std::min_element(fig.truth.begin(), fig.truth.end());
    double hi = *std::max_element(fig.truth.begin(), fig.truth.end());
    for (const auto& c : panel.curves) {
      lo = std::min(lo, *std::min_element(c.begin(), c.end()));
      hi = std::max(hi, *std::max_element(c.begin(), c.end()));
    }
    if (panel.band) {
      for (std::size_t i = 0; i < fig.grid.size(); ++i) {
        lo = std::min(lo, panel.band->lower(i));
        hi = std::max(hi, panel.band->upper(i));
      }
    }
    if (hi <= lo)
      hi = lo + 1.0;
    const double x0 = pw * static_cast<double>(p);
    const double tlo = fig.grid.front(), thi = fig.grid.back();
    auto px = [&](double t) { return x0 + pad + (t - tlo) / (thi - tlo) * (pw - 2 * pad); };
    auto py = [&](double v) { return ph - pad - (v - lo) / (hi - lo) * (ph - 2 * pad); };
    auto polyline = [&](const std::vector<double>& ys, const char* style) {
      os << "<polyline fill=\"none\" " << style << " points=\"";
      for (std::size_t i = 0; i < fig.grid.size(); ++i)
        os << px(fig.grid[i]) << ',' << py(ys[i]) << ' ';
      os << "\"/>\n";
    };
    os << "<text x=\"" << x0 + pad << "\" y=\"18\" font-size=\"12\">" << to_string(panel.method)
       << "</text>\n";
    for (const auto& c : panel.curves)
      polyline(c, "stroke=\"#9ecae1\" stroke-width=\"0.6\"");
    polyline(fig.truth, "stroke=\"black\" stroke-width=\"1.5\"");
    if (!panel.curves.empty())
      polyline(panel.curves.front(), "stroke=\"#08519c\" stroke-width=\"1.2\"");
    if (panel.band) {
      std::vector<double> lower(fig.grid.size()), upper(fig.grid.size());
      for (std::size_t i = 0; i < fig.grid.size(); ++i) {
        lower[i] = panel.band->lower(i);
        upper[i] = panel.band->upper(i);
      }
      polyline(lower, "stroke=\"#08519c\" stroke-dasharray=\"4,3\"");
      polyline(upper, "stroke=\"#08519c\" stroke-dasharray=\"4,3\"");
    }
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Bias sweep over delta (and bandwidth)
// ---------------------------------------------------------------------------

struct BiasRow {
  Method method = Method::direct;
  double delta = 0.0;
  std::size_t n = 0;
  double h = 0.0;  // 0 for the direct method
  std::size_t reps = 0;
  bool oracle = false;
  double mean_sup_error = 0.0;    // mean over reps of sup_t |estimate - truth|
  double sup_mean_bias = 0.0;     // sup_t |mean over reps of estimate - truth|
  double mean_probe_error = 0.0;  // mean signed error at probe_t
};

inline std::vector<BiasRow> run_bias_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> deltas = cfg.deltas.empty() ? std::vector<double>{cfg.delta} : cfg.deltas;
  const std::vector<double> bandwidths =
      cfg.bandwidths.empty() ? std::vector<double>{0.0} : cfg.bandwidths;  // 0: sqrt(delta)
  const bool has_spectral =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::spectral) != cfg.methods.end();
  const std::size_t settings = deltas.size() * (has_spectral ? bandwidths.size() : 1);
  detail::require(settings >= 2, "bias sweep needs at least two delta (or bandwidth) values");

  const std::vector<double> grid = cfg.resolved_grid().build();
  const std::vector<double> truth = true_N_curve(cfg.model, cfg.clip, grid);
  const std::vector<double> probe{cfg.probe_t};
  const double probe_truth = true_N(cfg.model, cfg.clip, cfg.probe_t);
  const auto streams = cfg.replication_streams();
  const std::size_t threads = worker_count(cfg.threads);

  std::vector<BiasRow> rows;
  for (double delta : deltas) {
    std::size_t n = cfg.n;
    if (cfg.hold_n_delta)
      n = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.n) * cfg.delta / delta));
    n = std::max<std::size_t>(n, 1);

    for (Method method : cfg.methods) {
      const std::vector<double> hs = method == Method::spectral ? bandwidths : std::vector<double>{0.0};
      for (double h : hs) {
        ExperimentConfig local = cfg;
        if (method == Method::spectral)
          local.spectral.h = h > 0.0 ? std::optional<double>(h) : std::nullopt;
        BiasRow row;
        row.method = method;
        row.delta = delta;
        row.n = n;
        row.h = method == Method::spectral ? local.spectral.bandwidth(delta) : 0.0;
        row.oracle = cfg.oracle && method == Method::spectral;

        std::vector<std::vector<double>> curves;
        std::vector<double> probes;
        if (row.oracle) {
          const SpectralDensity dens = spectral_density_from_model(cfg.model, delta, local.spectral);
          curves.push_back(spectral_N(dens, cfg.clip, grid, n, delta).values);
          probes.push_back(spectral_N(dens, cfg.clip, probe, n, delta).values[0]);
        } else {
          curves.resize(streams.size());
          probes.resize(streams.size());
          parallel_for(streams.size(), threads, [&](std::size_t r) {
            const IncrementSample sample =
                sample_increments(cfg.model, n, delta, cfg.base_seed, streams[r]);
            if (method == Method::direct) {
              curves[r] = direct_N(sample, cfg.clip, grid).values;
              probes[r] = direct_N(sample, cfg.clip, probe).values[0];
            } else {
              const SpectralDensity dens = spectral_density_on_grid(sample, local.spectral);
              curves[r] = spectral_N(dens, cfg.clip, grid, n, delta).values;
              probes[r] = spectral_N(dens, cfg.clip, probe, n, delta).values[0];
            }
          });
        }
        row.reps = curves.size();
        std::vector<double> mean(grid.size(), 0.0);
        double sup_sum = 0.0, probe_sum = 0.0;
        for (std::size_t r = 0; r < curves.size(); ++r) {
          double sup = 0.0;
          for (std::size_t i = 0; i < grid.size(); ++i) {
            sup = std::max(sup, std::abs(curves[r][i] - truth[i]));
            mean[i] += curves[r][i];
          }
          sup_sum += sup;
          probe_sum += probes[r] - probe_truth;
        }
        const double reps = static_cast<double>(curves.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
          row.sup_mean_bias = std::max(row.sup_mean_bias, std::abs(mean[i] / reps - truth[i]));
        row.mean_sup_error = sup_sum / reps;
        row.mean_probe_error = probe_sum / reps;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

inline std::string bias_sweep_csv(const std::vector<BiasRow>& rows) {
  std::ostringstream os;
  os << "method,delta,n,h,reps,oracle,mean_sup_error,sup_mean_bias,mean_probe_error\n";
  for (const auto& r : rows)
    os << to_string(r.method) << ',' << io::fmt(r.delta) << ',' << r.n << ',' << io::fmt(r.h) << ','
       << r.reps << ',' << r.oracle << ',' << io::fmt(r.mean_sup_error) << ','
       << io::fmt(r.sup_mean_bias) << ',' << io::fmt(r.mean_probe_error) << '\n';
  return os.str();
}

} // namespace levylab
