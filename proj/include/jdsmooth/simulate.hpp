#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jdsmooth/rng.hpp"

namespace jdsmooth {

// Jump-size law for the compound Poisson component.
struct JumpSizeDist {
  enum class Family { normal, cauchy };

  Family family = Family::normal;
  double location = 0.0;
  double scale = 0.036;  // sd for normal, scale for Cauchy

  static JumpSizeDist normal(double mean, double sd);
  static JumpSizeDist cauchy(double location, double scale);

  double draw(RandomStream& rng) const;
  // Mean if it exists (Cauchy has none).
  std::optional<double> mean() const;
  // E[Z^2]; +inf for Cauchy.
  double second_moment() const;
  // E[Z^4]; +inf for Cauchy.
  double fourth_moment() const;
  std::string describe() const;
};

struct NoJumps {};

struct CompoundPoisson {
  double lambda = 2.0;
  JumpSizeDist size{};
};

// J_t = c G_t + eta W_{G_t}, G_t ~ Gamma(shape = t/b, scale = b).
struct VarianceGamma {
  double c = -0.2;
  double eta = 0.2;
  double b = 0.23;
};

using JumpSpec = std::variant<NoJumps, CompoundPoisson, VarianceGamma>;

// Throws ValidationError on lambda < 0, b <= 0, eta < 0 or a non-positive size scale.
void validate_jump(const JumpSpec& jump);

// Variance rate of the jump component per unit time: lambda E[Z^2] or c^2 b + eta^2.
double jump_variance_rate(const JumpSpec& jump);

// Drift that is subtracted so the simulated jump part is a martingale
// (lambda E[Z] for compound Poisson when the mean exists, c for VG).
double jump_compensator(const JumpSpec& jump);

std::string describe(const JumpSpec& jump);

/// Latent dynamics dX = mu(X) dt + sigma(X) dW + dJ, observed through Y = \int X dt.
struct ModelSpec {
  std::function<double(double)> mu;
  std::function<double(double)> sigma;
  JumpSpec jump = NoJumps{};
  double x0 = 0.0;
  double y0 = 0.0;
  std::string name = "custom";

  // mu(x) = -10 x, sigma(x) = sqrt(0.1 + 0.1 x^2).
  static ModelSpec mean_reverting(JumpSpec jump = NoJumps{});

  // sigma^2(x) + jump variance rate: the target of the second-moment estimator.
  double second_moment(double x) const;
};

struct PathConfig {
  double t_span = 10.0;
  std::size_t n = 1000;
  std::size_t burn_in = 200;
  std::size_t substeps = 10;
  std::uint64_t seed = 0;

  double delta() const { return t_span / static_cast<double>(n); }
  // n >= 2, substeps >= 1, t_span > 0.
  void validate() const;
};

struct SamplePath {
  double delta = 0.0;
  std::vector<double> x;  // n + 2 latent states X_{i delta}
  std::vector<double> y;  // n + 2 integrated values Y_{i delta}
  std::uint64_t seed = 0;
  std::size_t substeps = 1;
  double jump_qv = 0.0;   // sum of squared jump increments over the retained span
};

inline constexpr double kExplosionBound = 1e8;

// N ~ Poisson(lambda dt) arrivals, sum of N size draws.
double sample_cp_increment(const CompoundPoisson& cp, double dt, RandomStream& rng);

// c dG + eta sqrt(dG) Z with dG ~ Gamma(dt/b, b). Uncompensated: E = c dt.
double sample_vg_increment(const VarianceGamma& vg, double dt, RandomStream& rng);

// One jump increment over dt (uncompensated); zero for NoJumps.
double sample_jump_increment(const JumpSpec& jump, double dt, RandomStream& rng);

/// Euler-Maruyama on X at step delta/substeps with a compensated jump
/// increment per substep; Y advanced by the left-point rule. The first
/// burn_in observations are discarded and y is re-based to y0 at the first
/// retained observation. Throws PathExplosion when |X| > 1e8 or X is not finite.
SamplePath simulate_path(const ModelSpec& spec, const PathConfig& cfg);

}  // namespace jdsmooth
