#include "jdsmooth/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jdsmooth/errors.hpp"
#include "jdsmooth/parallel.hpp"
#include "jdsmooth/stats.hpp"

namespace jdsmooth {

BandwidthChoice rule_of_thumb(const ProxySeries& xt, double t_span) {
  if (xt.size() < 2) throw ValidationError("rule of thumb needs at least 2 observations");
  if (!(t_span > 0.0)) throw ValidationError("time span must be > 0");
  const double s = sample_sd(xt.xt);
  if (!(s > 0.0)) throw NumericalError("degenerate sample");
  BandwidthChoice out;
  out.h = kRuleOfThumbFactor * s * std::pow(t_span, -0.2);
  out.method = BandwidthMethod::rule_of_thumb;
  return out;
}

std::vector<double> default_cv_grid(double h_rot, std::size_t points) {
  if (!(h_rot > 0.0)) throw ValidationError("reference bandwidth must be > 0");
  std::vector<double> grid(points);
  const double lo = std::log(h_rot / 5.0);
  const double hi = std::log(h_rot * 5.0);
  for (std::size_t k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(points - 1);
    grid[k] = std::exp(lo + t * (hi - lo));
  }
  return grid;
}

double cv_score(const ProxySeries& xt, double h, const EstimatorConfig& cfg, std::size_t* penalized) {
  if (xt.size() < 5) throw ValidationError("cross-validation needs a proxy series of length >= 5");
  if (!(h > 0.0)) throw ValidationError("bandwidth must be > 0");
  const RegressionDesign d = make_design(xt, cfg.alignment);
  const std::vector<double> r = drift_responses(xt);
  const std::size_t n = d.size();
  const double r_mean = mean(r);

  // Terms ordered by kernel point so each fit only visits its kernel window.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d.kernel_points[a] < d.kernel_points[b]; });
  std::vector<double> sorted_pts(n);
  for (std::size_t k = 0; k < n; ++k) sorted_pts[k] = d.kernel_points[order[k]];

  const double radius = cfg.kernel.support_radius() * h;
  const bool local_linear = cfg.method == Method::local_linear;
  double total = 0.0;
  std::size_t pen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d.regressors[i];
    const auto first = std::lower_bound(sorted_pts.begin(), sorted_pts.end(), x - radius) - sorted_pts.begin();
    const auto last = std::upper_bound(sorted_pts.begin(), sorted_pts.end(), x + radius) - sorted_pts.begin();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    std::size_t used = 0;
    for (auto k = first; k < last; ++k) {
      const std::size_t j = order[static_cast<std::size_t>(k)];
      if (j + 1 >= i && j <= i + 1) continue;  // j in {i-1, i, i+1}
      const double u = (d.kernel_points[j] - x) / h;
      if (std::abs(u) > cfg.kernel.support_radius()) continue;
      const double w = cfg.kernel(u);
      const double z = d.regressors[j] - x;
      s0 += w;
      s1 += w * z;
      s2 += w * z * z;
      t0 += w * r[j];
      t1 += w * z * r[j];
      ++used;
    }
    bool ok = used > 0 && s0 >= kDegeneracyFloor * static_cast<double>(n);
    double fit = 0.0;
    if (ok && local_linear) {
      const double det = s0 * s2 - s1 * s1;
      ok = det > 1e-12 * s0 * s2;
      if (ok) fit = (s2 * t0 - s1 * t1) / det;
    } else if (ok) {
      fit = t0 / s0;
    }
    const double e = ok ? r[i] - fit : r[i] - r_mean;
    if (!ok) ++pen;
    total += e * e;
  }
  if (penalized) *penalized = pen;
  if (pen == n) return std::numeric_limits<double>::quiet_NaN();
  return total / static_cast<double>(n);
}

BandwidthChoice cross_validate(const ProxySeries& xt, std::span<const double> h_grid, const EstimatorConfig& cfg,
                               unsigned threads) {
  if (h_grid.empty()) throw ValidationError("bandwidth grid is empty");
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    if (!(h_grid[k] > 0.0)) throw ValidationError("bandwidth grid must be strictly positive");
    if (k > 0 && !(h_grid[k] > h_grid[k - 1])) throw ValidationError("bandwidth grid must be strictly increasing");
  }
  BandwidthChoice out;
  out.method = BandwidthMethod::cross_validation;
  out.cv_curve.resize(h_grid.size());
  parallel_for(h_grid.size(), threads, [&](std::size_t k) {
    CvPoint& p = out.cv_curve[k];
    p.h = h_grid[k];
    p.cv = cv_score(xt, h_grid[k], cfg, &p.penalized);
  });
  double best = std::numeric_limits<double>::infinity();
  for (const CvPoint& p : out.cv_curve)
    if (std::isfinite(p.cv)) best = std::min(best, p.cv);
  if (!std::isfinite(best)) throw NumericalError("bandwidth grid too narrow");
  // Scores this close to the minimum are rounding noise, so the smallest such h wins.
  const std::vector<double> r = drift_responses(xt);
  double scale = 0.0;
  for (double v : r) scale += v * v;
  const double tie = kCvTieTolerance * scale / static_cast<double>(r.size());
  for (const CvPoint& p : out.cv_curve) {
    if (std::isfinite(p.cv) && p.cv <= best + tie) {
      out.h = p.h;
      break;
    }
  }
  return out;
}

}  // namespace jdsmooth
