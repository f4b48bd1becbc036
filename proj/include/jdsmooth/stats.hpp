#pragma once

#include <span>
#include <vector>

namespace jdsmooth {

double mean(std::span<const double> v);
// Sample standard deviation (n - 1 denominator). Requires v.size() >= 2.
double sample_sd(std::span<const double> v);

// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted data, p in [0, 1].
double quantile(std::span<const double> v, double p);
double quantile_sorted(std::span<const double> sorted, double p);

double normal_cdf(double x);
// Inverse standard normal CDF, p in (0, 1).
double normal_quantile(double p);

// sup_x |F_n(x) - Phi(x)| for data assumed already standardized.
double ks_statistic_normal(std::span<const double> v);

// `points` equispaced values on [lo, hi] (inclusive).
std::vector<double> linspace(double lo, double hi, std::size_t points);

}  // namespace jdsmooth
