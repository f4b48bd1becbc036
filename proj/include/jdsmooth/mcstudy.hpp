#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jdsmooth/estimators.hpp"
#include "jdsmooth/simulate.hpp"

namespace jdsmooth {

enum class GridMode { inner_quantile, full_range, fixed };

struct GridSpec {
  GridMode mode = GridMode::inner_quantile;
  double lo_q = 0.025;
  double hi_q = 0.975;
  double lo = 0.0;  // GridMode::fixed only
  double hi = 0.0;
  std::size_t points = 101;
};

struct McConfig {
  ModelSpec model = ModelSpec::mean_reverting();
  double t_span = 10.0;
  std::size_t n = 1000;
  std::size_t replicates = 100;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods{Method::local_linear, Method::nadaraya_watson};
  GridSpec grid{};
  std::vector<double> quantiles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double fixed_x = 0.0;  // point used for standardized (QQ) samples and M^ summaries
  std::size_t burn_in = 200;
  std::size_t substeps = 10;
  Kernel kernel = Kernel::gaussian();
  IndexAlignment alignment = IndexAlignment::aligned;
  // Fixed bandwidth; rule of thumb per replicate when unset.
  std::optional<double> bandwidth;
  // Pointwise normal bands at fixed_x for local linear, with coverage counts.
  bool coverage = false;
  double alpha = 0.05;
  double pilot_mult = 2.0;
  double max_failure_fraction = 0.10;
  unsigned threads = 1;  // 0 = all hardware threads; never changes the report

  void validate() const;
};

struct MethodStats {
  Method method = Method::local_linear;
  // RMSE of the replicate-averaged curve against the truth over the pooled grid.
  double rmse = 0.0;
  // Average of per-replicate RMSEs, each on that replicate's own inner-quantile grid.
  double mean_replicate_rmse = 0.0;
  std::vector<double> replicate_rmse;
  // Mean over replicates of mu^(q_r) - mu(q_r), q_r the replicate's own sample quantile.
  std::vector<double> bias_at_quantiles;
  std::vector<double> mean_curve;          // on McReport::grid
  std::vector<double> band_lo, band_hi;    // 2.5% / 97.5% replicate percentiles on the grid
  std::vector<double> at_fixed_x;          // mu^(fixed_x) per successful replicate
  std::vector<double> standardized;        // at_fixed_x centred and scaled by its sample mean / sd
  std::vector<double> m_at_fixed_x;        // M^(fixed_x) per successful replicate
  double mean_m_at_fixed_x = 0.0;
  std::size_t undefined_points = 0;
};

struct CoverageStats {
  std::size_t mu_defined = 0, mu_covered = 0;
  std::size_t m_defined = 0, m_covered = 0;
};

struct McReport {
  std::vector<double> grid;             // pooled evaluation grid
  std::vector<double> quantiles;
  std::vector<double> quantile_points;  // replicate average of each path's sample quantiles of X~
  double fixed_x = 0.0;
  double mu_at_fixed_x = 0.0;           // true drift at fixed_x
  double m_target_at_fixed_x = 0.0;     // true second moment at fixed_x
  std::vector<MethodStats> methods;
  std::optional<CoverageStats> coverage;
  std::size_t replicates = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;
  double mean_h = 0.0;
  double runtime_s = 0.0;               // wall time; not part of the serialized report

  const MethodStats& stats(Method m) const;
};

// Root mean square of (estimate - truth) over the defined (finite) grid points.
// Throws NumericalError when no point is defined.
double rmse(std::span<const double> grid, std::span<const double> estimate, const std::function<double(double)>& truth,
            std::size_t* excluded = nullptr);
double rmse(const CurveEstimate& est, const std::function<double(double)>& truth, std::size_t* excluded = nullptr);

McReport run_study(const McConfig& cfg);

struct QqData {
  std::vector<std::pair<double, double>> points;  // (theoretical, sample)
  double ks = 0.0;                                 // after location-scale standardization
};

// Requires >= 20 values with positive spread (ValidationError otherwise).
QqData qq_data(std::span<const double> values);

// Example 1 (compound Poisson, lambda = 2, N(0, 0.036^2)) or 2 (variance gamma).
McConfig example_config(int example, double t_span, std::size_t n, std::size_t replicates, std::uint64_t seed);

struct NamedConfig {
  std::string label;
  McConfig config;
};

// Preset study groups 1..6.
std::vector<NamedConfig> table_presets(int table, std::size_t replicates, std::uint64_t seed);

std::string method_name(Method m);

}  // namespace jdsmooth
