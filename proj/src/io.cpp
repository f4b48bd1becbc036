#include "jdsmooth/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "jdsmooth/errors.hpp"

#ifndef JDSMOOTH_VERSION
#define JDSMOOTH_VERSION "dev"
#endif

namespace jdsmooth {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

const char* alignment_name(IndexAlignment a) { return a == IndexAlignment::aligned ? "aligned" : "as_written"; }

std::string grid_mode_name(GridMode m) {
  switch (m) {
    case GridMode::inner_quantile: return "inner_quantile";
    case GridMode::full_range: return "full_range";
    case GridMode::fixed: return "fixed";
  }
  return "";
}

}  // namespace

const char* library_version() noexcept { return JDSMOOTH_VERSION; }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw ValidationError("column '" + name + "' not found in header");
}

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!have_header) {
      if (trim(line).empty()) throw ValidationError(path + ": line 1 is blank, expected a header");
      t.header = split(line);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) {
      // A trailing newline at end of file is not a row.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ValidationError(path + ": row " + std::to_string(lineno) + " is blank");
    }
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw ValidationError(path + ": row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                            " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
    t.line.push_back(lineno);
  }
  if (!have_header) throw ValidationError(path + ": empty file");
  return t;
}

double parse_number(const std::string& cell, const std::string& where) {
  if (cell.empty()) throw ValidationError(where + ": empty cell");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw ValidationError(where + ": cannot parse '" + cell + "' as a number");
  }
  if (used != cell.size()) throw ValidationError(where + ": cannot parse '" + cell + "' as a number");
  return v;
}

IngestResult ingest_prices(const std::string& path, const std::string& price_col, double delta,
                           const std::optional<std::string>& time_col) {
  const CsvTable t = read_csv(path);
  const std::size_t pc = t.column(price_col);
  const std::optional<std::size_t> tc = time_col ? std::optional(t.column(*time_col)) : std::nullopt;
  IngestResult out;
  std::vector<double> prices;
  prices.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path + ": row " + std::to_string(t.line[r]) + ", column '" + price_col + "'";
    const double p = parse_number(t.rows[r][pc], where);
    if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError(where + ": price must be positive, got " + t.rows[r][pc]);
    prices.push_back(p);
    if (tc) out.times.push_back(parse_number(t.rows[r][*tc], path + ": row " + std::to_string(t.line[r]) +
                                                                 ", column '" + *time_col + "'"));
  }
  out.rows = t.rows.size();
  if (prices.size() < 3) throw ValidationError(path + ": need at least 3 price rows, got " + std::to_string(prices.size()));
  out.proxy = build_log_proxy(prices, delta);
  return out;
}

ProxySeries read_proxy_csv(const std::string& path, std::optional<double> delta) {
  const CsvTable t = read_csv(path);
  auto has = [&](const char* name) {
    for (const auto& h : t.header)
      if (h == name) return true;
    return false;
  };
  auto read_column = [&](const std::string& name) {
    const std::size_t c = t.column(name);
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      v.push_back(parse_number(t.rows[r][c], path + ": row " + std::to_string(t.line[r]) + ", column '" + name + "'"));
    return v;
  };
  if (!delta) {
    const std::vector<double> tv = read_column("t");
    if (tv.size() < 2) throw ValidationError(path + ": cannot infer delta from fewer than 2 rows");
    delta = tv[1] - tv[0];
  }
  if (has("y")) return build_proxy(read_column("y"), *delta);
  ProxySeries out;
  out.delta = *delta;
  out.xt = read_column("xtilde");
  if (!(out.delta > 0.0)) throw ValidationError(path + ": delta must be > 0");
  if (out.xt.size() < 3) throw ValidationError(path + ": need at least 3 proxy values");
  for (std::size_t i = 0; i < out.xt.size(); ++i)
    if (!std::isfinite(out.xt[i])) throw ValidationError(path + ": non-finite proxy at row " + std::to_string(t.line[i]));
  return out;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string path_csv(const SamplePath& path) {
  std::string s = "i,t,x,y\n";
  for (std::size_t i = 0; i < path.x.size(); ++i)
    s += std::to_string(i) + ',' + format_number(static_cast<double>(i) * path.delta) + ',' + format_number(path.x[i]) +
         ',' + format_number(path.y[i]) + '\n';
  return s;
}

std::string proxy_csv(const ProxySeries& xt) {
  std::string s = "i,t,xtilde\n";
  for (std::size_t i = 0; i < xt.xt.size(); ++i)
    s += std::to_string(i) + ',' + format_number(static_cast<double>(i) * xt.delta) + ',' + format_number(xt.xt[i]) + '\n';
  return s;
}

std::string curve_csv(const CurveEstimate& est) {
  const bool bands = est.bands.has_value();
  std::string s = bands ? "x,mu_hat,m_hat,n_eff,lo_mu,hi_mu,lo_m,hi_m\n" : "x,mu_hat,m_hat,n_eff\n";
  auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : std::nan(""); };
  for (std::size_t k = 0; k < est.grid.size(); ++k) {
    s += format_number(est.grid[k]) + ',' + format_number(at(est.mu_hat, k)) + ',' + format_number(at(est.m_hat, k)) +
         ',' + format_number(at(est.n_eff, k));
    if (bands) {
      const ConfidenceBands& b = *est.bands;
      s += ',' + format_number(at(b.lo_mu, k)) + ',' + format_number(at(b.hi_mu, k)) + ',' +
           format_number(at(b.lo_m, k)) + ',' + format_number(at(b.hi_m, k));
    }
    s += '\n';
  }
  return s;
}

std::string cv_csv(const BandwidthChoice& choice) {
  std::string s = "h,cv,penalized\n";
  for (const auto& p : choice.cv_curve)
    s += format_number(p.h) + ',' + format_number(p.cv) + ',' + std::to_string(p.penalized) + '\n';
  return s;
}

std::string mc_curve_csv(const McReport& report, const std::function<double(double)>& truth) {
  std::string s = "x,truth";
  for (const auto& m : report.methods) {
    const std::string n = method_name(m.method);
    s += ',' + n + "_mean," + n + "_lo," + n + "_hi";
  }
  s += '\n';
  for (std::size_t k = 0; k < report.grid.size(); ++k) {
    s += format_number(report.grid[k]) + ',' + format_number(truth(report.grid[k]));
    for (const auto& m : report.methods)
      s += ',' + format_number(m.mean_curve[k]) + ',' + format_number(m.band_lo[k]) + ',' + format_number(m.band_hi[k]);
    s += '\n';
  }
  return s;
}

std::string qq_csv(const QqData& qq) {
  std::string s = "theoretical,sample\n";
  for (const auto& [a, b] : qq.points) s += format_number(a) + ',' + format_number(b) + '\n';
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw IoError("write to " + path + " failed");
}

std::string file_digest(const std::string& path) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : read_file(path)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["version"] = library_version();
  j["master_seed"] = master_seed;
  j["parameters"] = parameters;
  Json in = Json::array();
  for (const auto& [p, d] : inputs) in.push_back({{"path", p}, {"fnv1a64", d}});
  j["inputs"] = in;
  return j;
}

void write_sidecar_manifest(const std::string& out_path, const RunManifest& m, unsigned threads, double runtime_s) {
  Json j = m.to_json();
  j["outputs"] = m.outputs;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["timestamp"] = stamp;
  j["threads"] = threads;
  j["runtime_s"] = runtime_s;
  write_file(out_path + ".manifest.json", j.dump(2) + '\n');
}

Json curve_to_json(const CurveEstimate& est) {
  Json j;
  j["method"] = method_name(est.config.method);
  j["kernel"] = est.config.kernel.name();
  j["alignment"] = alignment_name(est.config.alignment);
  j["h"] = est.h;
  j["delta"] = est.delta;
  j["n_terms"] = est.n_terms;
  j["undefined"] = est.undefined;
  j["negative_m"] = est.negative_m;
  j["grid"] = numbers(est.grid);
  j["mu_hat"] = numbers(est.mu_hat);
  j["m_hat"] = numbers(est.m_hat);
  j["n_eff"] = numbers(est.n_eff);
  if (est.bands) {
    const ConfidenceBands& b = *est.bands;
    j["bands"] = {{"alpha", b.alpha},        {"bias_corrected", b.bias_corrected},
                  {"pilot_h", b.pilot_h},    {"lo_mu", numbers(b.lo_mu)},
                  {"hi_mu", numbers(b.hi_mu)}, {"lo_m", numbers(b.lo_m)},
                  {"hi_m", numbers(b.hi_m)}, {"undefined_mu", b.undefined_mu},
                  {"undefined_m", b.undefined_m}, {"negative_m", b.negative_m}};
  }
  return j;
}

Json report_to_json(const McReport& report, const McConfig& cfg) {
  Json j;
  j["schema"] = "jdsmooth.mc_report";
  j["schema_version"] = kReportSchemaVersion;
  Json c;
  c["model"] = cfg.model.name;
  c["jump"] = describe(cfg.model.jump);
  c["t_span"] = cfg.t_span;
  c["n"] = cfg.n;
  c["replicates"] = cfg.replicates;
  c["master_seed"] = cfg.master_seed;
  c["burn_in"] = cfg.burn_in;
  c["substeps"] = cfg.substeps;
  c["kernel"] = cfg.kernel.name();
  c["alignment"] = alignment_name(cfg.alignment);
  c["bandwidth"] = cfg.bandwidth ? Json(*cfg.bandwidth) : Json("rule_of_thumb");
  c["grid"] = {{"mode", grid_mode_name(cfg.grid.mode)}, {"lo_q", cfg.grid.lo_q}, {"hi_q", cfg.grid.hi_q},
               {"lo", cfg.grid.lo},   {"hi", cfg.grid.hi},     {"points", cfg.grid.points}};
  c["fixed_x"] = cfg.fixed_x;
  c["coverage"] = cfg.coverage;
  c["alpha"] = cfg.alpha;
  c["pilot_mult"] = cfg.pilot_mult;
  j["config"] = c;

  j["replicates"] = report.replicates;
  j["failed"] = report.failed;
  j["failures"] = report.failures;
  j["mean_h"] = report.mean_h;
  j["grid"] = numbers(report.grid);
  j["quantiles"] = numbers(report.quantiles);
  j["quantile_points"] = numbers(report.quantile_points);
  j["fixed_x"] = report.fixed_x;
  j["mu_at_fixed_x"] = report.mu_at_fixed_x;
  j["m_target_at_fixed_x"] = report.m_target_at_fixed_x;
  Json methods = Json::object();
  for (const auto& s : report.methods) {
    Json m;
    m["rmse"] = number(s.rmse);
    m["mean_replicate_rmse"] = number(s.mean_replicate_rmse);
    m["replicate_rmse"] = numbers(s.replicate_rmse);
    m["bias_at_quantiles"] = numbers(s.bias_at_quantiles);
    m["mean_curve"] = numbers(s.mean_curve);
    m["mc_band_lo"] = numbers(s.band_lo);
    m["mc_band_hi"] = numbers(s.band_hi);
    m["at_fixed_x"] = numbers(s.at_fixed_x);
    m["standardized"] = numbers(s.standardized);
    m["m_at_fixed_x"] = numbers(s.m_at_fixed_x);
    m["mean_m_at_fixed_x"] = number(s.mean_m_at_fixed_x);
    m["undefined_points"] = s.undefined_points;
    methods[method_name(s.method)] = m;
  }
  j["methods"] = methods;
  if (report.coverage) {
    const CoverageStats& cv = *report.coverage;
    j["coverage"] = {{"mu_defined", cv.mu_defined}, {"mu_covered", cv.mu_covered},
                     {"m_defined", cv.m_defined},   {"m_covered", cv.m_covered}};
  }
  return j;
}

std::vector<std::pair<double, double>> price_standin(std::size_t days, std::uint64_t seed, double p0) {
  if (days < 1) throw ValidationError("stand-in needs at least one day");
  if (!(p0 > 0.0)) throw ValidationError("initial price must be > 0");
  const ModelSpec model = ModelSpec::mean_reverting(CompoundPoisson{2.0, JumpSizeDist::normal(0.0, 0.036)});
  PathConfig pc;
  pc.n = days * 48;
  pc.t_span = static_cast<double>(days);
  pc.seed = seed;
  const SamplePath path = simulate_path(model, pc);
  std::vector<std::pair<double, double>> rows;
  rows.reserve(path.y.size());
  for (std::size_t i = 0; i < path.y.size(); ++i)
    rows.emplace_back(static_cast<double>(i) * path.delta, p0 * std::exp(path.y[i]));
  return rows;
}

std::string price_csv(const std::vector<std::pair<double, double>>& rows) {
  std::string s = "t,close\n";
  for (const auto& [t, p] : rows) s += format_number(t) + ',' + format_number(p) + '\n';
  return s;
}

}  // namespace jdsmooth
