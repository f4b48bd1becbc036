#include "jdsmooth/estimators.hpp"

#include <cmath>
#include <limits>

#include "jdsmooth/errors.hpp"
#include "jdsmooth/stats.hpp"

namespace jdsmooth {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_terms(const ProxySeries& xt) {
  if (xt.size() < 5) throw ValidationError("estimators need a proxy series of length >= 5 (n >= 3 terms)");
  if (!(xt.delta > 0.0)) throw ValidationError("proxy series has a non-positive step");
}

// Weighted sums for one grid point. Two response vectors share the kernel work.
struct Sums {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  double a0 = 0.0, a1 = 0.0;  // first response
  double b0 = 0.0, b1 = 0.0;  // second response
};

Sums accumulate(const RegressionDesign& d, std::span<const double> ra, std::span<const double> rb, double x,
                const EstimatorConfig& cfg) {
  Sums s;
  const double cutoff = cfg.kernel.support_radius();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double u = (d.kernel_points[i] - x) / cfg.bandwidth;
    if (std::abs(u) > cutoff) continue;
    const double k = cfg.kernel(u);
    const double z = d.regressors[i] - x;
    s.s0 += k;
    s.s1 += k * z;
    s.s2 += k * z * z;
    if (!ra.empty()) {
      s.a0 += k * ra[i];
      s.a1 += k * z * ra[i];
    }
    if (!rb.empty()) {
      s.b0 += k * rb[i];
      s.b1 += k * z * rb[i];
    }
  }
  return s;
}

bool defined_at(const Sums& s, std::size_t n, Method method) {
  if (!(s.s0 >= kDegeneracyFloor * static_cast<double>(n))) return false;
  if (method == Method::nadaraya_watson) return true;
  const double det = s.s0 * s.s2 - s.s1 * s.s1;
  return det > 1e-12 * s.s0 * s.s2;
}

double combine(double s0, double s1, double s2, double r0, double r1, Method method) {
  if (method == Method::nadaraya_watson) return r0 / s0;
  // sum w R / sum w with w = K (S2 - z S1)
  return (s2 * r0 - s1 * r1) / (s2 * s0 - s1 * s1);
}

CurveEstimate estimate_impl(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg,
                            bool want_mu, bool want_m, double factor) {
  require_terms(xt);
  cfg.validate();
  const RegressionDesign design = make_design(xt, cfg.alignment);
  const std::vector<double> r_mu = want_mu ? drift_responses(xt) : std::vector<double>{};
  const std::vector<double> r_m = want_m ? second_moment_responses(xt, factor) : std::vector<double>{};

  CurveEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.h = cfg.bandwidth;
  est.delta = xt.delta;
  est.n_terms = design.size();
  est.config = cfg;
  est.n_eff.resize(grid.size());
  if (want_mu) est.mu_hat.resize(grid.size());
  if (want_m) est.m_hat.resize(grid.size());

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Sums s = accumulate(design, r_mu, r_m, grid[k], cfg);
    est.n_eff[k] = s.s0;
    const bool ok = defined_at(s, design.size(), cfg.method);
    if (!ok) ++est.undefined;
    if (want_mu) est.mu_hat[k] = ok ? combine(s.s0, s.s1, s.s2, s.a0, s.a1, cfg.method) : kNaN;
    if (want_m) {
      est.m_hat[k] = ok ? combine(s.s0, s.s1, s.s2, s.b0, s.b1, cfg.method) : kNaN;
      if (ok && est.m_hat[k] < 0.0) ++est.negative_m;
    }
  }
  return est;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ValidationError("bandwidth must be > 0");
}

RegressionDesign make_design(const ProxySeries& xt, IndexAlignment alignment) {
  RegressionDesign d;
  if (xt.size() < 3) return d;
  const std::size_t n = xt.size() - 2;
  d.kernel_points.resize(n);
  d.regressors.resize(n);
  for (std::size_t i = 1; i + 1 < xt.size(); ++i) {
    d.kernel_points[i - 1] = xt.xt[i - 1];
    d.regressors[i - 1] = alignment == IndexAlignment::as_written ? xt.xt[i] : xt.xt[i - 1];
  }
  return d;
}

std::vector<double> drift_responses(const ProxySeries& xt) {
  std::vector<double> r;
  if (xt.size() < 3) return r;
  r.resize(xt.size() - 2);
  for (std::size_t i = 1; i + 1 < xt.size(); ++i) r[i - 1] = (xt.xt[i + 1] - xt.xt[i]) / xt.delta;
  return r;
}

std::vector<double> second_moment_responses(const ProxySeries& xt, double factor) {
  std::vector<double> r;
  if (xt.size() < 3) return r;
  r.resize(xt.size() - 2);
  for (std::size_t i = 1; i + 1 < xt.size(); ++i) {
    const double d = xt.xt[i + 1] - xt.xt[i];
    r[i - 1] = factor * d * d / xt.delta;
  }
  return r;
}

std::optional<std::vector<double>> ll_weights(const ProxySeries& xt, double x, const EstimatorConfig& cfg) {
  require_terms(xt);
  cfg.validate();
  const RegressionDesign d = make_design(xt, cfg.alignment);
  const Sums s = accumulate(d, {}, {}, x, cfg);
  if (!(s.s0 >= kDegeneracyFloor * static_cast<double>(d.size()))) return std::nullopt;
  std::vector<double> w(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double u = (d.kernel_points[i] - x) / cfg.bandwidth;
    const double k = std::abs(u) > cfg.kernel.support_radius() ? 0.0 : cfg.kernel(u);
    w[i] = k * (s.s2 - (d.regressors[i] - x) * s.s1);
  }
  return w;
}

LocalFit local_fit(const RegressionDesign& design, std::span<const double> responses, double x,
                   const EstimatorConfig& cfg) {
  if (responses.size() != design.size()) throw ValidationError("one response per design term required");
  const Sums s = accumulate(design, responses, {}, x, cfg);
  LocalFit fit;
  fit.n_eff = s.s0;
  fit.defined = defined_at(s, design.size(), cfg.method);
  fit.value = fit.defined ? combine(s.s0, s.s1, s.s2, s.a0, s.a1, cfg.method) : kNaN;
  return fit;
}

CurveEstimate estimate_mu(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg) {
  return estimate_impl(xt, grid, cfg, true, false, kSecondMomentFactor);
}

CurveEstimate estimate_m(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg,
                         double factor) {
  return estimate_impl(xt, grid, cfg, false, true, factor);
}

CurveEstimate estimate_curve(const ProxySeries& xt, std::span<const double> grid, const EstimatorConfig& cfg) {
  return estimate_impl(xt, grid, cfg, true, true, kSecondMomentFactor);
}

std::vector<double> density_estimate(const ProxySeries& xt, std::span<const double> grid, const Kernel& kernel,
                                     double h) {
  if (xt.size() < 2) throw ValidationError("density estimate needs at least 2 observations");
  if (!(h > 0.0)) throw ValidationError("bandwidth must be > 0");
  std::vector<double> p(grid.size());
  const double norm = 1.0 / (static_cast<double>(xt.size()) * h);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double s = 0.0;
    for (double v : xt.xt) s += kernel((v - grid[k]) / h);
    p[k] = s * norm;
  }
  return p;
}

std::vector<double> default_grid(const ProxySeries& xt, double lo_q, double hi_q, std::size_t points) {
  if (xt.size() < 2) throw ValidationError("grid needs at least 2 observations");
  if (points < 1) throw ValidationError("grid needs at least one point");
  if (!(lo_q >= 0.0 && lo_q < hi_q && hi_q <= 1.0)) throw ValidationError("grid quantiles must satisfy 0 <= lo < hi <= 1");
  return linspace(quantile(xt.xt, lo_q), quantile(xt.xt, hi_q), points);
}

}  // namespace jdsmooth
