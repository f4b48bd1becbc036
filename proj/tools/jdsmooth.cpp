#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jdsmooth/bandwidth.hpp"
#include "jdsmooth/errors.hpp"
#include "jdsmooth/estimators.hpp"
#include "jdsmooth/inference.hpp"
#include "jdsmooth/io.hpp"
#include "jdsmooth/mcstudy.hpp"
#include "jdsmooth/parallel.hpp"
#include "jdsmooth/simulate.hpp"
#include "jdsmooth/stats.hpp"

using namespace jdsmooth;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = 1;
};

struct SimulateOpts {
  std::string model = "default";
  std::string jump = "cp";
  double lambda = 2.0;
  std::string size = "normal:0,0.036";
  double t = 10.0;
  std::size_t n = 1000;
  std::size_t burn_in = 200;
  std::size_t substeps = 10;
  std::string proxy_out;
};

struct EstimateOpts {
  std::string in;
  std::optional<double> delta;
  std::string method = "ll";
  std::string kernel = "gaussian";
  std::string alignment = "aligned";
  std::string h = "auto";
  std::string cv_out;
  std::optional<double> grid_lo, grid_hi;
  std::size_t grid_n = 101;
  std::string bands;
  double pilot_mult = kDefaultPilotMultiplier;
  // empirical only
  std::string price_col = "close";
  std::string time_col;
};

struct StudyOpts {
  int example = 1;
  int table = 0;
  double t = 10.0;
  std::size_t n = 1000;
  std::size_t reps = 100;
  std::string kernel = "gaussian";
  std::string alignment = "aligned";
  std::string grid = "inner";
  std::size_t grid_n = 101;
  double fixed_x = 0.0;
  bool coverage = false;
  double alpha = 0.05;
  std::string curve_out;
  std::string qq_out;
};

JumpSizeDist parse_size(const std::string& s) {
  const auto colon = s.find(':');
  const auto comma = s.find(',');
  if (colon == std::string::npos || comma == std::string::npos || comma < colon)
    throw ValidationError("jump size must look like normal:MEAN,SD or cauchy:LOC,SCALE, got '" + s + "'");
  const std::string family = s.substr(0, colon);
  const double a = parse_number(s.substr(colon + 1, comma - colon - 1), "--jump-size");
  const double b = parse_number(s.substr(comma + 1), "--jump-size");
  if (family == "normal") return JumpSizeDist::normal(a, b);
  if (family == "cauchy") return JumpSizeDist::cauchy(a, b);
  throw ValidationError("unknown jump size family '" + family + "'");
}

ModelSpec make_model(const SimulateOpts& o) {
  if (o.model != "default") throw ValidationError("unknown model '" + o.model + "' (only 'default')");
  if (o.jump == "none") return ModelSpec::mean_reverting();
  if (o.jump == "cp") return ModelSpec::mean_reverting(CompoundPoisson{o.lambda, parse_size(o.size)});
  if (o.jump == "vg") return ModelSpec::mean_reverting(VarianceGamma{});
  throw ValidationError("unknown jump type '" + o.jump + "' (cp, vg or none)");
}

Method parse_method(const std::string& s) {
  if (s == "ll") return Method::local_linear;
  if (s == "nw") return Method::nadaraya_watson;
  throw ValidationError("unknown method '" + s + "' (ll or nw)");
}

IndexAlignment parse_alignment(const std::string& s) {
  if (s == "aligned") return IndexAlignment::aligned;
  if (s == "as_written") return IndexAlignment::as_written;
  throw ValidationError("unknown alignment '" + s + "' (aligned or as_written)");
}

double parse_alpha(const std::string& s) {
  const std::string v = s.rfind("alpha=", 0) == 0 ? s.substr(6) : s;
  const double a = parse_number(v, "--bands");
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("--bands alpha must lie in (0, 1)");
  return a;
}

bool is_output(const std::string& key) { return key == "out" || key.ends_with("-out"); }

std::string effective_value(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  const auto& r = opt->results();
  return r.empty() ? std::string("true") : r.back();
}

// Every option of the subcommand with its effective value, so the manifest records defaults too.
RunManifest manifest_for(const std::string& command, const CLI::App* sub, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.master_seed = seed;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "--threads" || name == "--config") continue;
    const std::string key = opt->get_single_name();
    if (is_output(key)) {
      if (opt->count() > 0) m.outputs[key] = effective_value(opt);
    } else {
      m.parameters[key] = effective_value(opt);
    }
  }
  return m;
}

void finish(const std::string& out, const RunManifest& m, const Common& c, std::chrono::steady_clock::time_point start) {
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_sidecar_manifest(out, m, resolve_threads(c.threads), runtime);
}

void run_simulate(const SimulateOpts& o, const Common& c, const CLI::App* sub) {
  const auto start = std::chrono::steady_clock::now();
  if (c.out.empty()) throw ValidationError("--out is required");
  PathConfig pc{o.t, o.n, o.burn_in, o.substeps, c.seed};
  const SamplePath path = simulate_path(make_model(o), pc);
  write_file(c.out, path_csv(path));
  if (!o.proxy_out.empty()) write_file(o.proxy_out, proxy_csv(build_proxy(path.y, path.delta)));
  const RunManifest m = manifest_for("simulate", sub, c.seed);
  finish(c.out, m, c, start);
  std::cout << "wrote " << path.x.size() << " observations (delta " << path.delta << ") to " << c.out << "\n";
}

CurveEstimate estimate_from(const ProxySeries& xt, const EstimateOpts& o, const Common& c, BandwidthChoice& bw) {
  EstimatorConfig cfg;
  cfg.kernel = Kernel::from_name(o.kernel);
  cfg.method = parse_method(o.method);
  cfg.alignment = parse_alignment(o.alignment);
  const double t_span = static_cast<double>(xt.size()) * xt.delta;
  if (o.h == "auto") {
    bw = rule_of_thumb(xt, t_span);
  } else if (o.h == "cv") {
    const double h0 = rule_of_thumb(xt, t_span).h;
    bw = cross_validate(xt, default_cv_grid(h0), cfg, c.threads);
  } else {
    bw.h = parse_number(o.h, "--h");
    bw.method = BandwidthMethod::fixed;
    if (!(bw.h > 0.0)) throw ValidationError("--h must be auto, cv or a positive number");
  }
  cfg.bandwidth = bw.h;

  std::vector<double> grid = default_grid(xt, 0.025, 0.975, o.grid_n);
  if (o.grid_lo || o.grid_hi) {
    const double lo = o.grid_lo.value_or(grid.front());
    const double hi = o.grid_hi.value_or(grid.back());
    if (!(lo < hi)) throw ValidationError("--grid-lo must be below --grid-hi");
    grid = linspace(lo, hi, o.grid_n);
  }
  CurveEstimate est = estimate_curve(xt, grid, cfg);
  if (!o.bands.empty()) {
    const double alpha = parse_alpha(o.bands);
    if (!(o.pilot_mult > 0.0)) throw ValidationError("--pilot-mult must be > 0");
    attach_bands(est, xt, alpha, o.pilot_mult * bw.h);
  }
  return est;
}

void emit_curve(const CurveEstimate& est, const BandwidthChoice& bw, const EstimateOpts& o, const Common& c,
                const RunManifest& m) {
  if (!o.cv_out.empty()) {
    if (bw.cv_curve.empty()) throw ValidationError("--cv-out needs --h cv");
    write_file(o.cv_out, cv_csv(bw));
  }
  const bool json = c.out.size() >= 5 && c.out.substr(c.out.size() - 5) == ".json";
  if (json) {
    Json j;
    j["schema"] = "jdsmooth.curve";
    j["schema_version"] = kReportSchemaVersion;
    j["manifest"] = m.to_json();
    j["curve"] = curve_to_json(est);
    write_file(c.out, j.dump(2) + '\n');
  } else {
    write_file(c.out, curve_csv(est));
  }
}

void run_estimate(const EstimateOpts& o, const Common& c, const CLI::App* sub) {
  const auto start = std::chrono::steady_clock::now();
  if (c.out.empty()) throw ValidationError("--out is required");
  const ProxySeries xt = read_proxy_csv(o.in, o.delta);
  BandwidthChoice bw;
  const CurveEstimate est = estimate_from(xt, o, c, bw);
  RunManifest m = manifest_for("estimate", sub, c.seed);
  m.inputs.emplace_back(o.in, file_digest(o.in));
  emit_curve(est, bw, o, c, m);
  finish(c.out, m, c, start);
  std::cout << "h = " << bw.h << ", " << est.grid.size() << " grid points, " << est.undefined << " undefined\n";
}

double fitted_slope(const CurveEstimate& est) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, k = 0;
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    if (!std::isfinite(est.mu_hat[i])) continue;
    const double x = est.grid[i], y = est.mu_hat[i];
    sx += x, sy += y, sxx += x * x, sxy += x * y, k += 1;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

void run_empirical(const EstimateOpts& o, const Common& c, const CLI::App* sub) {
  const auto start = std::chrono::steady_clock::now();
  if (c.out.empty()) throw ValidationError("--out is required");
  const double delta = o.delta.value_or(kFiveMinuteDelta);
  const IngestResult in = ingest_prices(o.in, o.price_col, delta,
                                        o.time_col.empty() ? std::nullopt : std::optional<std::string>(o.time_col));
  BandwidthChoice bw;
  const CurveEstimate est = estimate_from(in.proxy, o, c, bw);
  RunManifest m = manifest_for("empirical", sub, c.seed);
  m.inputs.emplace_back(o.in, file_digest(o.in));
  m.parameters["rows"] = in.rows;
  m.parameters["dropped_rows"] = in.dropped;
  m.parameters["spacing"] = "all consecutive rows treated as delta apart";
  emit_curve(est, bw, o, c, m);
  finish(c.out, m, c, start);
  std::cout << in.rows << " rows, " << in.dropped << " dropped; h = " << bw.h << "; drift slope over grid "
            << fitted_slope(est) << "\n";
}

void run_study_cmd(const StudyOpts& o, const Common& c, const CLI::App* sub) {
  const auto start = std::chrono::steady_clock::now();
  if (c.out.empty()) throw ValidationError("--out is required");
  std::vector<NamedConfig> configs;
  if (o.table != 0) {
    configs = table_presets(o.table, o.reps, c.seed);
  } else {
    configs.push_back({"example " + std::to_string(o.example),
                       example_config(o.example, o.t, o.n, o.reps, c.seed)});
  }
  for (auto& nc : configs) {
    nc.config.threads = c.threads;
    nc.config.kernel = Kernel::from_name(o.kernel);
    nc.config.alignment = parse_alignment(o.alignment);
    nc.config.grid.points = o.grid_n;
    if (o.grid == "full") nc.config.grid.mode = GridMode::full_range;
    else if (o.grid != "inner") throw ValidationError("--grid must be inner or full");
    nc.config.fixed_x = o.fixed_x;
    nc.config.coverage = o.coverage;
    nc.config.alpha = o.alpha;
  }

  const RunManifest m = manifest_for("mc-study", sub, c.seed);
  Json j;
  j["schema"] = "jdsmooth.mc_study";
  j["schema_version"] = kReportSchemaVersion;
  j["manifest"] = m.to_json();
  Json studies = Json::array();
  for (const auto& nc : configs) {
    const McReport r = run_study(nc.config);
    Json s;
    s["label"] = nc.label;
    s["report"] = report_to_json(r, nc.config);
    studies.push_back(std::move(s));
    std::printf("%-22s", nc.label.c_str());
    for (const auto& ms : r.methods) std::printf("  RMSE-%s %.4f", method_name(ms.method).c_str(), ms.rmse);
    if (r.failed) std::printf("  (%zu failed)", r.failed);
    std::printf("\n");
    if (configs.size() == 1) {
      if (!o.curve_out.empty()) write_file(o.curve_out, mc_curve_csv(r, nc.config.model.mu));
      if (!o.qq_out.empty()) write_file(o.qq_out, qq_csv(qq_data(r.stats(Method::local_linear).standardized)));
    }
  }
  if (configs.size() > 1 && (!o.curve_out.empty() || !o.qq_out.empty()))
    throw ValidationError("--curve-out and --qq-out need a single study (not --table with several rows)");
  j["studies"] = studies;
  write_file(c.out, j.dump(2) + '\n');
  finish(c.out, m, c, start);
}

void run_standin(std::size_t days, double p0, const Common& c, const CLI::App* sub) {
  const auto start = std::chrono::steady_clock::now();
  if (c.out.empty()) throw ValidationError("--out is required");
  write_file(c.out, price_csv(price_standin(days, c.seed, p0)));
  const RunManifest m = manifest_for("standin", sub, c.seed);
  finish(c.out, m, c, start);
  std::cout << "wrote " << days * 48 + 2 << " five-minute prices to " << c.out << "\n";
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--out", c.out, "Output file")->required();
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_estimate_flags(CLI::App* sub, EstimateOpts& o) {
  sub->add_option("--in", o.in, "Input CSV")->required();
  sub->add_option("--delta", o.delta, "Sampling step");
  sub->add_option("--method", o.method, "ll or nw")->capture_default_str();
  sub->add_option("--kernel", o.kernel, "gaussian or epanechnikov")->capture_default_str();
  sub->add_option("--alignment", o.alignment, "aligned or as_written")->capture_default_str();
  sub->add_option("--h", o.h, "auto, cv or a bandwidth")->capture_default_str();
  sub->add_option("--cv-out", o.cv_out, "Write the CV curve here (with --h cv)");
  sub->add_option("--grid-lo", o.grid_lo, "Grid start (default 2.5% quantile)");
  sub->add_option("--grid-hi", o.grid_hi, "Grid end (default 97.5% quantile)");
  sub->add_option("--grid-n", o.grid_n, "Grid points")->capture_default_str();
  sub->add_option("--bands", o.bands, "Confidence bands, e.g. alpha=0.05");
  sub->add_option("--pilot-mult", o.pilot_mult, "Pilot bandwidth multiplier for mu''")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric drift and second-moment estimation for integrated jump diffusions"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  Common common;
  SimulateOpts sim;
  auto* s = app.add_subcommand("simulate", "Simulate a path of the integrated jump diffusion");
  add_common(s, common);
  s->add_option("--model", sim.model, "Model (default: mu=-10x, sigma^2=0.1+0.1x^2)")->capture_default_str();
  s->add_option("--jump", sim.jump, "cp, vg or none")->capture_default_str();
  s->add_option("--lambda", sim.lambda, "Compound Poisson intensity")->capture_default_str();
  s->add_option("--jump-size", sim.size, "normal:MEAN,SD or cauchy:LOC,SCALE")->capture_default_str();
  s->add_option("--t", sim.t, "Time span")->capture_default_str();
  s->add_option("--n", sim.n, "Observations")->capture_default_str();
  s->add_option("--burn-in", sim.burn_in, "Discarded leading observations")->capture_default_str();
  s->add_option("--substeps", sim.substeps, "Euler substeps per observation")->capture_default_str();
  s->add_option("--proxy-out", sim.proxy_out, "Also write the proxy CSV");

  EstimateOpts est;
  auto* e = app.add_subcommand("estimate", "Estimate mu and M from a proxy or path CSV");
  add_common(e, common);
  add_estimate_flags(e, est);

  EstimateOpts emp;
  auto* p = app.add_subcommand("empirical", "Estimate from a price CSV via log-price proxies");
  add_common(p, common);
  add_estimate_flags(p, emp);
  p->add_option("--price-col", emp.price_col, "Price column")->capture_default_str();
  p->add_option("--time-col", emp.time_col, "Time column (optional)");

  StudyOpts st;
  auto* m = app.add_subcommand("mc-study", "Monte Carlo comparison of local linear and Nadaraya-Watson");
  add_common(m, common);
  m->add_option("--example", st.example, "1 (compound Poisson) or 2 (variance gamma)")->capture_default_str();
  m->add_option("--table", st.table, "Preset study group 1..6 (overrides --example/--t/--n)");
  m->add_option("--t", st.t, "Time span")->capture_default_str();
  m->add_option("--n", st.n, "Observations per path")->capture_default_str();
  m->add_option("--reps", st.reps, "Replicates")->capture_default_str();
  m->add_option("--kernel", st.kernel, "gaussian or epanechnikov")->capture_default_str();
  m->add_option("--alignment", st.alignment, "aligned or as_written")->capture_default_str();
  m->add_option("--grid", st.grid, "inner (2.5-97.5% quantiles) or full range")->capture_default_str();
  m->add_option("--grid-n", st.grid_n, "Grid points")->capture_default_str();
  m->add_option("--fixed-x", st.fixed_x, "Point for standardized estimates")->capture_default_str();
  m->add_flag("--coverage", st.coverage, "Record band coverage at --fixed-x");
  m->add_option("--alpha", st.alpha, "Band level for --coverage")->capture_default_str();
  m->add_option("--curve-out", st.curve_out, "CSV of mean curves and Monte Carlo bands");
  m->add_option("--qq-out", st.qq_out, "CSV of QQ pairs for the local linear estimate");

  std::size_t days = 60;
  double p0 = 10.0;
  auto* g = app.add_subcommand("standin", "Generate a synthetic five-minute price CSV");
  add_common(g, common);
  g->add_option("--days", days, "Trading days (48 bars each)")->capture_default_str();
  g->add_option("--p0", p0, "Initial price")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (s->parsed()) run_simulate(sim, common, s);
    else if (e->parsed()) run_estimate(est, common, e);
    else if (p->parsed()) run_empirical(emp, common, p);
    else if (m->parsed()) run_study_cmd(st, common, m);
    else if (g->parsed()) run_standin(days, p0, common, g);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 3;
  }
  return 0;
}
