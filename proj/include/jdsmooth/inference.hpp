#pragma once

#include <optional>
#include <span>

#include "jdsmooth/estimators.hpp"
#include "jdsmooth/proxy.hpp"

namespace jdsmooth {

struct BandOptions {
  double alpha = 0.05;
  bool bias_correct = true;
  // Bands are left undefined outside [q(lo_q), q(hi_q)] of X~ when set.
  bool restrict_to_inner = true;
  double lo_q = 0.025;
  double hi_q = 0.975;
};

// Pilot bandwidth for the second-derivative fit: pilot_mult * h.
inline constexpr double kDefaultPilotMultiplier = 2.0;

// Multiplies the local average of (X~_{i+1} - X~_i)^4 / delta to give the
// plug-in for the jump fourth moment in the M^ variance. Produced by
// tools/calibrate_m_variance (mean-reverting model with compound Poisson jumps,
// lambda = 2, N(0, 0.036^2) sizes, T = 10, n = 2500, 400 replicates, x = 0,
// seed 20240601); see README for the procedure.
inline constexpr double kFourthMomentCalibration = 1.70;

// Second derivative at x of a kernel-weighted local cubic fit of `responses`
// on the design regressors, bandwidth pilot_h. nullopt when the fit is degenerate.
std::optional<double> local_cubic_second_derivative(const RegressionDesign& design,
                                                    std::span<const double> responses, double x,
                                                    const Kernel& kernel, double pilot_h);

/// Normal band for mu at every grid point:
///   mu^ - (1/2) h^2 mu^'' B_K  -/+  z_{1-alpha/2} (n delta h)^{-1/2} sqrt(V M^ / p^)
/// with B_K the kernel bias constant, mu^'' from a local cubic at pilot_h
/// and p^ = n_eff / (n h). Undefined where p^ or M^ is unusable.
ConfidenceBands mu_band(const CurveEstimate& est, const ProxySeries& xt, double alpha, double pilot_h,
                        const BandOptions& opts = {});

// Band for M with the variance V c4^(x) / p^(x); c4^ is the calibrated local
// fourth-moment plug-in described at kFourthMomentCalibration.
ConfidenceBands m_band(const CurveEstimate& est, const ProxySeries& xt, double alpha, double pilot_h,
                       const BandOptions& opts = {});

// Plug-in fourth-moment estimate c4^(x) at each grid point (NaN where undefined).
std::vector<double> fourth_moment_plugin(const ProxySeries& xt, std::span<const double> grid,
                                         const EstimatorConfig& cfg);

// mu_band and m_band merged and stored in est.bands (est must hold both curves).
void attach_bands(CurveEstimate& est, const ProxySeries& xt, double alpha, double pilot_h,
                  const BandOptions& opts = {});

}  // namespace jdsmooth
