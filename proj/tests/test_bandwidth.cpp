#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jdsmooth/bandwidth.hpp"
#include "jdsmooth/errors.hpp"
#include "oracles.hpp"

using namespace jdsmooth;

namespace {

ProxySeries series(std::vector<double> v, double delta) {
  ProxySeries p;
  p.delta = delta;
  p.xt = std::move(v);
  return p;
}

// X~ driven by a nonlinear drift sin(5x) plus noise.
ProxySeries sine_series(std::uint64_t seed, std::size_t n = 400) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  const double delta = 0.05;
  std::vector<double> v{0.0, 0.1};
  while (v.size() < n) {
    const double prev = v[v.size() - 2];
    const double cur = v.back();
    v.push_back(cur + delta * (std::sin(5.0 * prev) - 2.0 * prev) + 0.1 * nd(gen));
  }
  return series(v, delta);
}

// Radius beyond which the library treats the gaussian kernel as zero.
const double kGaussTail = Kernel::gaussian().support_radius();

// Direct transcription of the leave-one-out criterion.
double brute_cv(const ProxySeries& xt, double h, IndexAlignment al) {
  const std::size_t n = xt.size() - 2;
  std::vector<double> kp(n), z(n), r(n);
  for (std::size_t i = 1; i + 1 < xt.size(); ++i) {
    kp[i - 1] = xt.xt[i - 1];
    z[i - 1] = al == IndexAlignment::aligned ? xt.xt[i - 1] : xt.xt[i];
    r[i - 1] = (xt.xt[i + 1] - xt.xt[i]) / xt.delta;
  }
  double rbar = 0;
  for (double v : r) rbar += v;
  rbar /= static_cast<double>(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> w, zz, rr;
    for (std::size_t j = 0; j < n; ++j) {
      if (j + 1 == i || j == i || j == i + 1) continue;
      const double u = (kp[j] - z[i]) / h;
      w.push_back(std::abs(u) > kGaussTail ? 0.0 : oracle::gauss(u));
      zz.push_back(z[j] - z[i]);
      rr.push_back(r[j]);
    }
    double s0 = 0, s1 = 0, s2 = 0;
    for (std::size_t j = 0; j < w.size(); ++j) s0 += w[j], s1 += w[j] * zz[j], s2 += w[j] * zz[j] * zz[j];
    // Undefined fit: empty neighbourhood or a singular local design.
    const bool degenerate = s0 < 1e-10 * static_cast<double>(n) || s0 * s2 - s1 * s1 <= 1e-12 * s0 * s2;
    const double fit = degenerate ? rbar : oracle::wls_intercept(w, zz, rr);
    total += (r[i] - fit) * (r[i] - fit);
  }
  return total / static_cast<double>(n);
}

EstimatorConfig config() { return EstimatorConfig{}; }

}  // namespace

TEST(Bandwidth, RuleOfThumbArithmetic) {
  // sd exactly 1 for {-1, 1} repeated: use a symmetric pair set scaled to unit sd.
  std::vector<double> v{-1, 1, -1, 1};
  const double s = std::sqrt(4.0 / 3.0);
  for (auto& e : v) e /= s;
  const ProxySeries xt = series(v, 2.5);
  EXPECT_NEAR(rule_of_thumb(xt, 10.0).h, 1.06 * std::pow(10.0, -0.2), 1e-12);
  EXPECT_NEAR(rule_of_thumb(xt, 10.0).h, 0.66875, 1e-4);
  EXPECT_NEAR(rule_of_thumb(xt, 1.0).h, 1.06, 1e-12);
  std::vector<double> half(v);
  for (auto& e : half) e *= 0.5;
  EXPECT_NEAR(rule_of_thumb(series(half, 2.5), 10.0).h, 0.5 * rule_of_thumb(xt, 10.0).h, 1e-12);
  std::vector<double> shifted(v);
  for (auto& e : shifted) e += 4.0;
  EXPECT_NEAR(rule_of_thumb(series(shifted, 2.5), 10.0).h, rule_of_thumb(xt, 10.0).h, 1e-12);
  EXPECT_EQ(rule_of_thumb(xt, 10.0).method, BandwidthMethod::rule_of_thumb);
}

TEST(Bandwidth, RuleOfThumbErrors) {
  EXPECT_THROW(rule_of_thumb(series({1, 1, 1}, 1.0), 1.0), NumericalError);
  EXPECT_THROW(rule_of_thumb(series({1}, 1.0), 1.0), ValidationError);
  EXPECT_THROW(rule_of_thumb(series({1, 2}, 1.0), 0.0), ValidationError);
}

TEST(Bandwidth, DefaultGrid) {
  const auto g = default_cv_grid(0.1);
  ASSERT_EQ(g.size(), 25u);
  EXPECT_NEAR(g.front(), 0.02, 1e-15);
  EXPECT_NEAR(g.back(), 0.5, 1e-14);
  EXPECT_NEAR(g[12], 0.1, 1e-15);
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(g[k] / g[k - 1], g[1] / g[0], 1e-12);
}

TEST(Bandwidth, CvMatchesBruteForce) {
  const ProxySeries xt = sine_series(1);
  const std::vector<double> grid{0.02, 0.05, 0.1, 0.2, 0.4, 0.8};
  for (auto al : {IndexAlignment::aligned, IndexAlignment::as_written}) {
    EstimatorConfig cfg;
    cfg.alignment = al;
    const BandwidthChoice c = cross_validate(xt, grid, cfg);
    ASSERT_EQ(c.cv_curve.size(), grid.size());
    std::size_t best = 0;
    std::vector<double> ref;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ref.push_back(brute_cv(xt, grid[k], al));
      EXPECT_NEAR(c.cv_curve[k].cv, ref[k], 1e-9 * ref[k]) << "h=" << grid[k] << " penalized=" << c.cv_curve[k].penalized;
      if (ref[k] < ref[best]) best = k;
    }
    EXPECT_EQ(c.h, grid[best]);
    EXPECT_EQ(c.method, BandwidthMethod::cross_validation);
  }
}

TEST(Bandwidth, CvCurveIsUShaped) {
  const ProxySeries xt = sine_series(2, 2000);
  const BandwidthChoice c = cross_validate(xt, default_cv_grid(0.2), config());
  EXPECT_GT(c.h, c.cv_curve.front().h);
  EXPECT_LT(c.h, c.cv_curve.back().h);
  for (const auto& p : c.cv_curve) EXPECT_GE(p.cv, 0.0);
}

TEST(Bandwidth, AffineResponsesTieToSmallestH) {
  // X~_{i+1} - X~_i = delta (a + b X~_{i-1}) exactly: an affine drift without noise.
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  const double delta = 0.1;
  std::vector<double> v{0.3, -0.2};
  for (int i = 0; i < 120; ++i) v.push_back(nd(gen));
  // Overwrite so responses are affine in the aligned regressor.
  for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i + 1] = v[i] + delta * (0.5 - 2.0 * v[i - 1]);
  const ProxySeries xt = series(v, delta);
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
  const BandwidthChoice c = cross_validate(xt, grid, config());
  for (const auto& p : c.cv_curve) EXPECT_LT(p.cv, 1e-18);
  for (const auto& p : c.cv_curve) EXPECT_GE(p.cv, 0.0);
  EXPECT_EQ(c.h, 0.5);
}

TEST(Bandwidth, SingleElementGridAndRefinement) {
  const ProxySeries xt = sine_series(4);
  const std::vector<double> one{0.17};
  EXPECT_EQ(cross_validate(xt, one, config()).h, 0.17);
  const std::vector<double> coarse = default_cv_grid(0.15, 9);
  const std::vector<double> fine = default_cv_grid(0.15, 17);  // contains every coarse point
  const BandwidthChoice a = cross_validate(xt, coarse, config());
  const BandwidthChoice b = cross_validate(xt, fine, config());
  double best_a = 1e300, best_b = 1e300;
  for (const auto& p : a.cv_curve) best_a = std::min(best_a, p.cv);
  for (const auto& p : b.cv_curve) best_b = std::min(best_b, p.cv);
  EXPECT_LE(best_b, best_a + 1e-12);
  EXPECT_NE(std::find(fine.begin(), fine.end(), b.h), fine.end());
}

TEST(Bandwidth, ParallelGridIsIdentical) {
  const ProxySeries xt = sine_series(5);
  const auto grid = default_cv_grid(0.15);
  const BandwidthChoice a = cross_validate(xt, grid, config(), 1);
  const BandwidthChoice b = cross_validate(xt, grid, config(), 4);
  ASSERT_EQ(a.cv_curve.size(), b.cv_curve.size());
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_EQ(a.cv_curve[k].cv, b.cv_curve[k].cv);
  EXPECT_EQ(a.h, b.h);
}

TEST(Bandwidth, GridValidation) {
  const ProxySeries xt = sine_series(6);
  EXPECT_THROW(cross_validate(xt, std::vector<double>{}, config()), ValidationError);
  EXPECT_THROW(cross_validate(xt, std::vector<double>{0.1, 0.05}, config()), ValidationError);
  EXPECT_THROW(cross_validate(xt, std::vector<double>{-0.1, 0.05}, config()), ValidationError);
}

TEST(Bandwidth, PenaltyForEmptyNeighbourhoods) {
  // A dense cluster plus isolated outliers that have no neighbours at this bandwidth.
  std::vector<double> v;
  for (int i = 0; i < 60; ++i) v.push_back(i % 15 == 7 ? 50.0 + i : 0.01 * ((i * 7) % 60));
  const ProxySeries xt = series(v, 1.0);
  std::size_t pen = 0;
  const double cv = cv_score(xt, 0.05, config(), &pen);
  EXPECT_TRUE(std::isfinite(cv));
  EXPECT_GT(pen, 0u);
}
