#pragma once

#include <span>
#include <vector>

#include "jdsmooth/estimators.hpp"
#include "jdsmooth/proxy.hpp"

namespace jdsmooth {

enum class BandwidthMethod { rule_of_thumb, cross_validation, fixed };

struct CvPoint {
  double h = 0.0;
  double cv = 0.0;              // NaN when every leave-one-out fit was degenerate
  std::size_t penalized = 0;    // leave-one-out fits replaced by the mean-deviation penalty
};

struct BandwidthChoice {
  double h = 0.0;
  BandwidthMethod method = BandwidthMethod::fixed;
  std::vector<CvPoint> cv_curve;
};

inline constexpr double kRuleOfThumbFactor = 1.06;

// h = 1.06 * sd(X~) * t_span^(-1/5), t_span = n * delta. Zero variance throws "degenerate sample".
BandwidthChoice rule_of_thumb(const ProxySeries& xt, double t_span);

// 25 log-spaced points on [h_rot / 5, 5 h_rot].
std::vector<double> default_cv_grid(double h_rot, std::size_t points = 25);

/// CV(h) = n^-1 sum_i [R_i - a_{h,-i}(Z_i)]^2 where R_i is the drift response,
/// Z_i the regressor of term i, and a_{h,-i} the local fit (cfg.method) that
/// drops terms i-1, i and i+1 -- every term that touches observation X~_i. An
/// undefined leave-one-out fit contributes (R_i - mean R)^2 instead.
double cv_score(const ProxySeries& xt, double h, const EstimatorConfig& cfg, std::size_t* penalized = nullptr);

// CV scores within kCvTieTolerance * mean(R^2) of the minimum count as ties.
inline constexpr double kCvTieTolerance = 1e-14;

// Grid must be non-empty, positive and strictly increasing. Ties go to the smaller h.
// Throws NumericalError("bandwidth grid too narrow") when CV is undefined everywhere.
BandwidthChoice cross_validate(const ProxySeries& xt, std::span<const double> h_grid, const EstimatorConfig& cfg,
                               unsigned threads = 1);

}  // namespace jdsmooth
