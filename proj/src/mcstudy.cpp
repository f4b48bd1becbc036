#include "jdsmooth/mcstudy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "jdsmooth/bandwidth.hpp"
#include "jdsmooth/errors.hpp"
#include "jdsmooth/inference.hpp"
#include "jdsmooth/parallel.hpp"
#include "jdsmooth/proxy.hpp"
#include "jdsmooth/stats.hpp"

namespace jdsmooth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> make_grid(const GridSpec& g, std::span<const double> values) {
  switch (g.mode) {
    case GridMode::inner_quantile:
      return linspace(quantile(values, g.lo_q), quantile(values, g.hi_q), g.points);
    case GridMode::full_range: {
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      return linspace(*lo, *hi, g.points);
    }
    case GridMode::fixed:
      return linspace(g.lo, g.hi, g.points);
  }
  return {};
}

struct Replicate {
  ProxySeries xt;
  double h = 0.0;
  bool ok = false;
  std::string error;
};

struct MethodSlot {
  std::vector<double> curve;      // on the pooled grid
  std::vector<double> at_q;       // at the replicate's own quantile points
  double at_x = kNaN;
  double m_at_x = kNaN;
  double own_rmse = kNaN;
};

struct EstimateSlot {
  std::vector<MethodSlot> methods;
  std::vector<double> q_points;  // this replicate's sample quantiles of X~
  bool mu_defined = false, mu_covered = false;
  bool m_defined = false, m_covered = false;
};

}  // namespace

void McConfig::validate() const {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (methods.empty()) throw ValidationError("at least one method is required");
  if (!model.mu || !model.sigma) throw ValidationError("model needs mu and sigma");
  for (double q : quantiles)
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantiles must lie in (0, 1)");
  if (grid.points < 1) throw ValidationError("grid needs at least one point");
  if (grid.mode == GridMode::inner_quantile && !(grid.lo_q >= 0.0 && grid.lo_q < grid.hi_q && grid.hi_q <= 1.0))
    throw ValidationError("grid quantiles must satisfy 0 <= lo < hi <= 1");
  if (grid.mode == GridMode::fixed && !(grid.lo < grid.hi)) throw ValidationError("fixed grid needs lo < hi");
  if (bandwidth && !(*bandwidth > 0.0)) throw ValidationError("bandwidth must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(pilot_mult > 0.0)) throw ValidationError("pilot multiplier must be > 0");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0))
    throw ValidationError("failure fraction must lie in [0, 1)");
  validate_jump(model.jump);
  PathConfig pc{t_span, n, burn_in, substeps, 0};
  pc.validate();
}

const MethodStats& McReport::stats(Method m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw ValidationError("method " + method_name(m) + " not part of this study");
}

std::string method_name(Method m) { return m == Method::local_linear ? "ll" : "nw"; }

double rmse(std::span<const double> grid, std::span<const double> estimate, const std::function<double(double)>& truth,
            std::size_t* excluded) {
  if (grid.size() != estimate.size()) throw ValidationError("grid and estimate sizes differ");
  if (grid.empty()) throw ValidationError("rmse needs a nonempty grid");
  double ss = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(estimate[k])) continue;
    const double e = estimate[k] - truth(grid[k]);
    ss += e * e;
    ++used;
  }
  if (excluded) *excluded = grid.size() - used;
  if (used == 0) throw NumericalError("rmse undefined: no grid point has an estimate");
  return std::sqrt(ss / static_cast<double>(used));
}

double rmse(const CurveEstimate& est, const std::function<double(double)>& truth, std::size_t* excluded) {
  return rmse(est.grid, est.mu_hat, truth, excluded);
}

McReport run_study(const McConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t reps = cfg.replicates;

  std::vector<Replicate> rep(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    PathConfig pc{cfg.t_span, cfg.n, cfg.burn_in, cfg.substeps, derive_seed(cfg.master_seed, r)};
    try {
      const SamplePath path = simulate_path(cfg.model, pc);
      rep[r].xt = build_proxy(path.y, path.delta);
      rep[r].h = cfg.bandwidth ? *cfg.bandwidth : rule_of_thumb(rep[r].xt, cfg.t_span).h;
      rep[r].ok = true;
    } catch (const NumericalError& e) {
      rep[r].error = "replicate " + std::to_string(r) + ": " + e.what();
    }
  });

  McReport out;
  out.replicates = reps;
  for (const auto& r : rep)
    if (!r.ok) {
      ++out.failed;
      out.failures.push_back(r.error);
    }
  if (static_cast<double>(out.failed) > cfg.max_failure_fraction * static_cast<double>(reps) || out.failed == reps)
    throw NumericalError(std::to_string(out.failed) + " of " + std::to_string(reps) +
                         " replicates failed; first: " + out.failures.front());

  std::vector<double> pooled;
  double h_sum = 0.0;
  std::size_t good = 0;
  for (const auto& r : rep)
    if (r.ok) {
      pooled.insert(pooled.end(), r.xt.xt.begin(), r.xt.xt.end());
      h_sum += r.h;
      ++good;
    }
  out.mean_h = h_sum / static_cast<double>(good);
  std::sort(pooled.begin(), pooled.end());
  out.grid = make_grid(cfg.grid, pooled);
  out.quantiles = cfg.quantiles;
  pooled = {};
  out.fixed_x = cfg.fixed_x;
  out.mu_at_fixed_x = cfg.model.mu(cfg.fixed_x);
  out.m_target_at_fixed_x = cfg.model.second_moment(cfg.fixed_x);

  const std::size_t g = out.grid.size();
  const std::size_t nq = cfg.quantiles.size();
  const std::size_t nm = cfg.methods.size();

  std::vector<EstimateSlot> slots(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    if (!rep[r].ok) return;
    const ProxySeries& xt = rep[r].xt;
    const std::vector<double> own = make_grid(cfg.grid, xt.xt);
    std::vector<double> sorted(xt.xt);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> points(out.grid);
    EstimateSlot& slot = slots[r];
    for (double q : cfg.quantiles) slot.q_points.push_back(quantile_sorted(sorted, q));
    points.insert(points.end(), slot.q_points.begin(), slot.q_points.end());
    points.push_back(cfg.fixed_x);
    points.insert(points.end(), own.begin(), own.end());

    slot.methods.resize(nm);
    for (std::size_t k = 0; k < nm; ++k) {
      EstimatorConfig ec{cfg.kernel, rep[r].h, cfg.alignment, cfg.methods[k]};
      const CurveEstimate est = estimate_curve(xt, points, ec);
      MethodSlot& ms = slot.methods[k];
      ms.curve.assign(est.mu_hat.begin(), est.mu_hat.begin() + static_cast<std::ptrdiff_t>(g));
      ms.at_q.assign(est.mu_hat.begin() + static_cast<std::ptrdiff_t>(g),
                     est.mu_hat.begin() + static_cast<std::ptrdiff_t>(g + nq));
      ms.at_x = est.mu_hat[g + nq];
      ms.m_at_x = est.m_hat[g + nq];
      const std::span<const double> own_est(est.mu_hat.data() + g + nq + 1, own.size());
      try {
        ms.own_rmse = rmse(own, own_est, cfg.model.mu);
      } catch (const NumericalError&) {
        ms.own_rmse = kNaN;
      }
    }

    if (cfg.coverage) {
      const double x0[] = {cfg.fixed_x};
      EstimatorConfig ec{cfg.kernel, rep[r].h, cfg.alignment, Method::local_linear};
      CurveEstimate est = estimate_curve(xt, x0, ec);
      BandOptions opts;
      opts.alpha = cfg.alpha;
      attach_bands(est, xt, cfg.alpha, cfg.pilot_mult * rep[r].h, opts);
      const ConfidenceBands& b = *est.bands;
      if (std::isfinite(b.lo_mu[0]) && std::isfinite(b.hi_mu[0])) {
        slot.mu_defined = true;
        slot.mu_covered = b.lo_mu[0] <= out.mu_at_fixed_x && out.mu_at_fixed_x <= b.hi_mu[0];
      }
      if (std::isfinite(b.lo_m[0]) && std::isfinite(b.hi_m[0])) {
        slot.m_defined = true;
        slot.m_covered = b.lo_m[0] <= out.m_target_at_fixed_x && out.m_target_at_fixed_x <= b.hi_m[0];
      }
    }
  });

  // Reduction in replicate order, independent of how the work was scheduled.
  out.quantile_points.assign(nq, 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t r = 0; r < reps; ++r)
      if (rep[r].ok) out.quantile_points[q] += slots[r].q_points[q];
    out.quantile_points[q] /= static_cast<double>(good);
  }
  for (std::size_t k = 0; k < nm; ++k) {
    MethodStats s;
    s.method = cfg.methods[k];
    s.mean_curve.assign(g, kNaN);
    s.band_lo.assign(g, kNaN);
    s.band_hi.assign(g, kNaN);
    std::vector<double> column;
    for (std::size_t p = 0; p < g; ++p) {
      column.clear();
      for (std::size_t r = 0; r < reps; ++r)
        if (rep[r].ok && std::isfinite(slots[r].methods[k].curve[p])) column.push_back(slots[r].methods[k].curve[p]);
      if (column.empty()) {
        ++s.undefined_points;
        continue;
      }
      s.mean_curve[p] = mean(column);
      std::sort(column.begin(), column.end());
      s.band_lo[p] = quantile_sorted(column, 0.025);
      s.band_hi[p] = quantile_sorted(column, 0.975);
    }
    s.rmse = rmse(out.grid, s.mean_curve, cfg.model.mu);

    s.bias_at_quantiles.assign(nq, kNaN);
    for (std::size_t q = 0; q < nq; ++q) {
      column.clear();
      for (std::size_t r = 0; r < reps; ++r) {
        if (!rep[r].ok) continue;
        const double v = slots[r].methods[k].at_q[q];
        if (std::isfinite(v)) column.push_back(v - cfg.model.mu(slots[r].q_points[q]));
      }
      if (!column.empty()) s.bias_at_quantiles[q] = mean(column);
    }

    std::vector<double> m_vals;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!rep[r].ok) continue;
      const MethodSlot& ms = slots[r].methods[k];
      if (std::isfinite(ms.own_rmse)) s.replicate_rmse.push_back(ms.own_rmse);
      if (std::isfinite(ms.at_x)) s.at_fixed_x.push_back(ms.at_x);
      if (std::isfinite(ms.m_at_x)) m_vals.push_back(ms.m_at_x);
    }
    s.mean_replicate_rmse = s.replicate_rmse.empty() ? kNaN : mean(s.replicate_rmse);
    s.mean_m_at_fixed_x = m_vals.empty() ? kNaN : mean(m_vals);
    s.m_at_fixed_x = std::move(m_vals);
    if (s.at_fixed_x.size() >= 2) {
      const double mu = mean(s.at_fixed_x);
      const double sd = sample_sd(s.at_fixed_x);
      if (sd > 0.0)
        for (double v : s.at_fixed_x) s.standardized.push_back((v - mu) / sd);
    }
    out.methods.push_back(std::move(s));
  }

  if (cfg.coverage) {
    CoverageStats c;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!rep[r].ok) continue;
      c.mu_defined += slots[r].mu_defined;
      c.mu_covered += slots[r].mu_covered;
      c.m_defined += slots[r].m_defined;
      c.m_covered += slots[r].m_covered;
    }
    out.coverage = c;
  }

  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

QqData qq_data(std::span<const double> values) {
  if (values.size() < 20) throw ValidationError("QQ data needs at least 20 values, got " + std::to_string(values.size()));
  std::vector<double> v(values.begin(), values.end());
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError("QQ data contains a non-finite value");
  const double mu = mean(v);
  const double sd = sample_sd(v);
  if (!(sd > 0.0)) throw ValidationError("QQ data has zero variance");
  std::sort(v.begin(), v.end());
  QqData out;
  const double n = static_cast<double>(v.size());
  out.points.reserve(v.size());
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.points.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / n), v[i]);
    z[i] = (v[i] - mu) / sd;
  }
  out.ks = ks_statistic_normal(z);
  return out;
}

McConfig example_config(int example, double t_span, std::size_t n, std::size_t replicates, std::uint64_t seed) {
  McConfig c;
  switch (example) {
    case 1:
      c.model = ModelSpec::mean_reverting(CompoundPoisson{2.0, JumpSizeDist::normal(0.0, 0.036)});
      break;
    case 2:
      c.model = ModelSpec::mean_reverting(VarianceGamma{});
      break;
    default:
      throw ValidationError("example must be 1 or 2");
  }
  c.t_span = t_span;
  c.n = n;
  c.replicates = replicates;
  c.master_seed = seed;
  return c;
}

std::vector<NamedConfig> table_presets(int table, std::size_t replicates, std::uint64_t seed) {
  const std::size_t sizes[] = {500, 1000, 2500};
  std::vector<NamedConfig> out;
  auto label = [](const std::string& head, std::size_t n) { return head + " n=" + std::to_string(n); };
  switch (table) {
    case 1:
      out.push_back({"T=10 n=1000", example_config(1, 10.0, 1000, replicates, seed)});
      break;
    case 2:
    case 6: {
      const int ex = table == 2 ? 1 : 2;
      for (double t : {10.0, 20.0, 50.0})
        for (std::size_t n : sizes)
          out.push_back({label("T=" + std::to_string(static_cast<int>(t)), n), example_config(ex, t, n, replicates, seed)});
      break;
    }
    case 3:
      for (double lambda : {1.0, 2.0, 5.0})
        for (std::size_t n : sizes) {
          McConfig c = example_config(1, 10.0, n, replicates, seed);
          c.model = ModelSpec::mean_reverting(CompoundPoisson{lambda, JumpSizeDist::normal(0.0, 0.036)});
          out.push_back({label("lambda=" + std::to_string(static_cast<int>(lambda)), n), c});
        }
      break;
    case 4: {
      const std::pair<std::string, JumpSizeDist> laws[] = {{"N(0,0.036^2)", JumpSizeDist::normal(0.0, 0.036)},
                                                          {"N(0,1)", JumpSizeDist::normal(0.0, 1.0)},
                                                          {"Cauchy(0,1)", JumpSizeDist::cauchy(0.0, 1.0)}};
      for (const auto& [name, law] : laws)
        for (std::size_t n : sizes) {
          McConfig c = example_config(1, 10.0, n, replicates, seed);
          c.model = ModelSpec::mean_reverting(CompoundPoisson{2.0, law});
          out.push_back({label(name, n), c});
        }
      break;
    }
    case 5:
      out.push_back({"T=10 n=1000", example_config(2, 10.0, 1000, replicates, seed)});
      break;
    default:
      throw ValidationError("table must be one of 1..6");
  }
  return out;
}

}  // namespace jdsmooth
