#include "jdsmooth/inference.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "jdsmooth/errors.hpp"
#include "jdsmooth/stats.hpp"

namespace jdsmooth {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDensityFloor = 1e-8;

struct BandGeometry {
  double z = 0.0;
  double lo_limit = -std::numeric_limits<double>::infinity();
  double hi_limit = std::numeric_limits<double>::infinity();
};

BandGeometry geometry(const ProxySeries& xt, double alpha, const BandOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  BandGeometry g;
  g.z = normal_quantile(1.0 - alpha / 2.0);
  if (opts.restrict_to_inner) {
    g.lo_limit = quantile(xt.xt, opts.lo_q);
    g.hi_limit = quantile(xt.xt, opts.hi_q);
  }
  return g;
}

void check_estimate(const CurveEstimate& est, const ProxySeries& xt, double pilot_h) {
  if (!(pilot_h > 0.0)) throw ValidationError("pilot bandwidth must be > 0");
  if (!(est.h > 0.0) || est.n_terms == 0) throw ValidationError("curve estimate has no bandwidth or terms");
  if (xt.size() != est.n_terms + 2) throw ValidationError("proxy series does not match the curve estimate");
}

// Stable (n delta h)^{-1/2} sqrt(V * var / p) half-width; NaN when unusable.
double half_width(double z, const CurveEstimate& est, double v, double var, double n_eff) {
  const double n = static_cast<double>(est.n_terms);
  const double p = n_eff / (n * est.h);
  if (!(p > kDensityFloor) || !(var >= 0.0)) return kNaN;
  return z / std::sqrt(n * est.delta * est.h) * std::sqrt(v * var / p);
}

std::vector<double> curve_or_compute(const CurveEstimate& est, const ProxySeries& xt, bool mu) {
  const auto& have = mu ? est.mu_hat : est.m_hat;
  if (have.size() == est.grid.size()) return have;
  const CurveEstimate re = mu ? estimate_mu(xt, est.grid, est.config) : estimate_m(xt, est.grid, est.config);
  return mu ? re.mu_hat : re.m_hat;
}

ConfidenceBands empty_bands(double alpha, double pilot_h, bool bias_correct) {
  ConfidenceBands b;
  b.alpha = alpha;
  b.pilot_h = pilot_h;
  b.bias_corrected = bias_correct;
  return b;
}

}  // namespace

std::optional<double> local_cubic_second_derivative(const RegressionDesign& design,
                                                    std::span<const double> responses, double x,
                                                    const Kernel& kernel, double pilot_h) {
  if (responses.size() != design.size()) throw ValidationError("one response per design term required");
  // Normal equations in the scaled variable t = (Z - x) / pilot_h for conditioning.
  Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
  double mass = 0.0;
  const double cutoff = kernel.support_radius();
  for (std::size_t i = 0; i < design.size(); ++i) {
    const double u = (design.kernel_points[i] - x) / pilot_h;
    if (std::abs(u) > cutoff) continue;
    const double w = kernel(u);
    const double t = (design.regressors[i] - x) / pilot_h;
    const Eigen::Vector4d basis(1.0, t, t * t, t * t * t);
    gram.noalias() += w * basis * basis.transpose();
    rhs.noalias() += w * responses[i] * basis;
    mass += w;
  }
  if (!(mass >= kDegeneracyFloor * static_cast<double>(design.size()))) return std::nullopt;
  const Eigen::ColPivHouseholderQR<Eigen::Matrix4d> qr(gram);
  if (qr.rank() < 4) return std::nullopt;
  const Eigen::Vector4d beta = qr.solve(rhs);
  return 2.0 * beta(2) / (pilot_h * pilot_h);
}

ConfidenceBands mu_band(const CurveEstimate& est, const ProxySeries& xt, double alpha, double pilot_h,
                        const BandOptions& opts) {
  check_estimate(est, xt, pilot_h);
  const BandGeometry g = geometry(xt, alpha, opts);
  const KernelMoments& km = est.config.kernel.moments();
  const double b_k = bias_constant(km);
  const std::vector<double> mu = curve_or_compute(est, xt, true);
  const std::vector<double> m = curve_or_compute(est, xt, false);
  const RegressionDesign design = make_design(xt, est.config.alignment);
  const std::vector<double> r = drift_responses(xt);

  ConfidenceBands b = empty_bands(alpha, pilot_h, opts.bias_correct);
  const std::size_t k_n = est.grid.size();
  b.lo_mu.assign(k_n, kNaN);
  b.hi_mu.assign(k_n, kNaN);
  b.bias_mu.assign(k_n, kNaN);
  for (std::size_t k = 0; k < k_n; ++k) {
    const double x = est.grid[k];
    if (x < g.lo_limit || x > g.hi_limit || !std::isfinite(mu[k]) || !std::isfinite(m[k])) {
      ++b.undefined_mu;
      continue;
    }
    if (m[k] < 0.0) {
      ++b.negative_m;
      ++b.undefined_mu;
      continue;
    }
    double bias = 0.0;
    if (opts.bias_correct) {
      const auto d2 = local_cubic_second_derivative(design, r, x, est.config.kernel, pilot_h);
      if (!d2) {
        ++b.undefined_mu;
        continue;
      }
      bias = 0.5 * est.h * est.h * *d2 * b_k;
    }
    const double hw = half_width(g.z, est, km.v, m[k], est.n_eff[k]);
    if (!std::isfinite(hw)) {
      ++b.undefined_mu;
      continue;
    }
    b.bias_mu[k] = bias;
    b.lo_mu[k] = mu[k] - bias - hw;
    b.hi_mu[k] = mu[k] - bias + hw;
  }
  return b;
}

std::vector<double> fourth_moment_plugin(const ProxySeries& xt, std::span<const double> grid,
                                         const EstimatorConfig& cfg) {
  const RegressionDesign design = make_design(xt, cfg.alignment);
  std::vector<double> q(design.size());
  for (std::size_t i = 1; i + 1 < xt.size(); ++i) {
    const double d = xt.xt[i + 1] - xt.xt[i];
    q[i - 1] = d * d * d * d / xt.delta;
  }
  EstimatorConfig local = cfg;
  local.method = Method::nadaraya_watson;
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const LocalFit f = local_fit(design, q, grid[k], local);
    out[k] = f.defined ? kFourthMomentCalibration * f.value : kNaN;
  }
  return out;
}

ConfidenceBands m_band(const CurveEstimate& est, const ProxySeries& xt, double alpha, double pilot_h,
                       const BandOptions& opts) {
  check_estimate(est, xt, pilot_h);
  const BandGeometry g = geometry(xt, alpha, opts);
  const KernelMoments& km = est.config.kernel.moments();
  const double b_k = bias_constant(km);
  const std::vector<double> m = curve_or_compute(est, xt, false);
  const std::vector<double> c4 = fourth_moment_plugin(xt, est.grid, est.config);
  const RegressionDesign design = make_design(xt, est.config.alignment);
  const std::vector<double> r2 = second_moment_responses(xt);

  ConfidenceBands b = empty_bands(alpha, pilot_h, opts.bias_correct);
  const std::size_t k_n = est.grid.size();
  b.lo_m.assign(k_n, kNaN);
  b.hi_m.assign(k_n, kNaN);
  b.bias_m.assign(k_n, kNaN);
  for (std::size_t k = 0; k < k_n; ++k) {
    const double x = est.grid[k];
    if (x < g.lo_limit || x > g.hi_limit || !std::isfinite(m[k]) || !std::isfinite(c4[k])) {
      ++b.undefined_m;
      continue;
    }
    if (m[k] < 0.0) {
      ++b.negative_m;
      ++b.undefined_m;
      continue;
    }
    double bias = 0.0;
    if (opts.bias_correct) {
      const auto d2 = local_cubic_second_derivative(design, r2, x, est.config.kernel, pilot_h);
      if (!d2) {
        ++b.undefined_m;
        continue;
      }
      bias = 0.5 * est.h * est.h * *d2 * b_k;
    }
    const double hw = half_width(g.z, est, km.v, c4[k], est.n_eff[k]);
    if (!std::isfinite(hw)) {
      ++b.undefined_m;
      continue;
    }
    b.bias_m[k] = bias;
    b.lo_m[k] = m[k] - bias - hw;
    b.hi_m[k] = m[k] - bias + hw;
  }
  return b;
}

void attach_bands(CurveEstimate& est, const ProxySeries& xt, double alpha, double pilot_h, const BandOptions& opts) {
  ConfidenceBands mu = mu_band(est, xt, alpha, pilot_h, opts);
  ConfidenceBands m = m_band(est, xt, alpha, pilot_h, opts);
  mu.lo_m = std::move(m.lo_m);
  mu.hi_m = std::move(m.hi_m);
  mu.bias_m = std::move(m.bias_m);
  mu.undefined_m = m.undefined_m;
  mu.negative_m = std::max(mu.negative_m, m.negative_m);
  est.bands = std::move(mu);
}

}  // namespace jdsmooth
