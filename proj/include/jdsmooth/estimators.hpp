#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jdsmooth/kernels.hpp"
#include "jdsmooth/proxy.hpp"

namespace jdsmooth {

// Which proxy enters the linear term of the local fit.
//   as_written: kernel at X~_{i-1}, polynomial term (X~_i - x)
//   aligned:    kernel and polynomial both at X~_{i-1}
enum class IndexAlignment { as_written, aligned };

enum class Method { local_linear, nadaraya_watson };

struct EstimatorConfig {
  Kernel kernel = Kernel::gaussian();
  double bandwidth = 0.0;
  IndexAlignment alignment = IndexAlignment::aligned;
  Method method = Method::local_linear;

  void validate() const;
};

// Factor turning E[(dX~)^2]/delta, which tends to (2/3) M(x), into an estimate of M(x).
inline constexpr double kSecondMomentFactor = 1.5;

// A grid point is undefined when sum_i K((X~_{i-1} - x)/h) < kDegeneracyFloor * n.
inline constexpr double kDegeneracyFloor = 1e-10;

// Regression terms i = 1..L-2 of a proxy series of length L.
struct RegressionDesign {
  std::vector<double> kernel_points;  // X~_{i-1}
  std::vector<double> regressors;     // X~_i or X~_{i-1}, per alignment
  std::size_t size() const noexcept { return kernel_points.size(); }
};

RegressionDesign make_design(const ProxySeries& xt, IndexAlignment alignment);

// (X~_{i+1} - X~_i) / delta for i = 1..L-2.
std::vector<double> drift_responses(const ProxySeries& xt);
// factor * (X~_{i+1} - X~_i)^2 / delta for i = 1..L-2.
std::vector<double> second_moment_responses(const ProxySeries& xt, double factor = kSecondMomentFactor);

struct ConfidenceBands {
  double alpha = 0.05;
  std::vector<double> lo_mu, hi_mu, lo_m, hi_m;
  // Subtracted bias terms (zero when not bias-corrected).
  std::vector<double> bias_mu, bias_m;
  bool bias_corrected = true;
  double pilot_h = 0.0;
  std::size_t undefined_mu = 0;
  std::size_t undefined_m = 0;
  std::size_t negative_m = 0;  // points where M^ < 0 made the band undefined
};

struct CurveEstimate {
  std::vector<double> grid;
  std::vector<double> mu_hat;  // empty when not requested
  std::vector<double> m_hat;   // empty when not requested; not truncated at 0
  std::vector<double> n_eff;   // sum_i K((X~_{i-1} - x)/h)
  double h = 0.0;
  double delta = 0.0;
  std::size_t n_terms = 0;
  std::size_t undefined = 0;   // grid points below the degeneracy floor
  std::size_t negative_m = 0;  // grid points with M^ < 0
  EstimatorConfig config;
  std::optional<ConfidenceBands> bands;
};

/// Local-linear weights
///   w_{i-1} = K((X~_{i-1}-x)/h) [S_2 - (Z_i - x) S_1],
///   S_k = sum_j K((X~_{j-1}-x)/h) (Z_j - x)^k,
/// with Z the regressor chosen by cfg.alignment. nullopt when the
/// neighbourhood of x is empty (degenerate design).
std::optional<std::vector<double>> ll_weights(const ProxySeries& xt, double x, const EstimatorConfig& cfg);

struct LocalFit {
  double value = 0.0;
  double n_eff = 0.0;
  bool defined = false;
};

// Local fit of arbitrary responses (one per design term) at x; cfg.method selects LL or NW.
LocalFit local_fit(const RegressionDesign& design, std::span<const double> responses, double x,
                   const EstimatorConfig& cfg);

CurveEstimate estimate_mu(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg);
CurveEstimate estimate_m(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg,
                         double factor = kSecondMomentFactor);
// Both curves from one pass over the data.
CurveEstimate estimate_curve(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg);

// p^(x) = (1/(n h)) sum_{i=1..n} K((X~_{i-1} - x)/h) over all n entries of xt.
std::vector<double> density_estimate(const ProxySeries& xt, std::span<const double> grid, const Kernel& kernel,
                                     double h);

// `points` equispaced values between the lo_q and hi_q sample quantiles of X~.
std::vector<double> default_grid(const ProxySeries& xt, double lo_q = 0.025, double hi_q = 0.975,
                                 std::size_t points = 101);

}  // namespace jdsmooth
