#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jdsmooth/bandwidth.hpp"
#include "jdsmooth/estimators.hpp"
#include "jdsmooth/mcstudy.hpp"
#include "jdsmooth/proxy.hpp"
#include "jdsmooth/simulate.hpp"

namespace jdsmooth {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

const char* library_version() noexcept;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // 1-based file line of each row

  // Throws ValidationError naming the missing column.
  std::size_t column(const std::string& name) const;
};

// Comma-separated with a header line. Blank rows and ragged rows are errors.
CsvTable read_csv(const std::string& path);

// Strict decimal parse; throws ValidationError mentioning `where` on failure.
double parse_number(const std::string& cell, const std::string& where);

struct IngestResult {
  ProxySeries proxy;
  std::vector<double> times;  // empty without a time column
  std::size_t rows = 0;
  std::size_t dropped = 0;
};

// Positive prices from `price_col`, in file order, through build_log_proxy.
IngestResult ingest_prices(const std::string& path, const std::string& price_col, double delta,
                           const std::optional<std::string>& time_col = std::nullopt);

// Proxy from an `i,t,xtilde` file or, when it has a `y` column, from a path file.
// delta defaults to the spacing of the `t` column.
ProxySeries read_proxy_csv(const std::string& path, std::optional<double> delta = std::nullopt);

std::string format_number(double v);  // %.17g, "nan" for non-finite

std::string path_csv(const SamplePath& path);
std::string proxy_csv(const ProxySeries& xt);
std::string curve_csv(const CurveEstimate& est);
std::string cv_csv(const BandwidthChoice& choice);
// x, truth and per-method mean curve plus replicate band.
std::string mc_curve_csv(const McReport& report, const std::function<double(double)>& truth);
std::string qq_csv(const QqData& qq);

// Writes the whole file or throws IoError.
void write_file(const std::string& path, const std::string& content);

// 64-bit FNV-1a of the file contents, as 16 hex digits.
std::string file_digest(const std::string& path);

struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  Json outputs = Json::object();  // destinations; recorded in the sidecar only

  // Reproducibility record embedded in outputs; no wall-clock fields or output paths.
  Json to_json() const;
};

// <out>.manifest.json: the manifest plus outputs, timestamp, threads and runtime.
void write_sidecar_manifest(const std::string& out_path, const RunManifest& m, unsigned threads, double runtime_s);

Json curve_to_json(const CurveEstimate& est);
Json report_to_json(const McReport& report, const McConfig& cfg);

// Synthetic five-minute price series standing in for exchange data: the
// mean-reverting model with compound Poisson jumps sampled at delta = 1/48,
// prices = p0 * exp(Y). Rows are (t in days, price).
std::vector<std::pair<double, double>> price_standin(std::size_t days, std::uint64_t seed, double p0 = 10.0);
std::string price_csv(const std::vector<std::pair<double, double>>& rows);

}  // namespace jdsmooth
