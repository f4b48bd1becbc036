#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

namespace jdsmooth {

enum class KernelId { gaussian, epanechnikov, custom };

// K_1^j = \int u^j K(u) du (j = 0..3) and K_2^j = \int u^j K(u)^2 du (j = 0..2).
struct KernelMoments {
  std::array<double, 4> k1{};
  std::array<double, 3> k2{};
  double v = 0.0;  // asymptotic variance constant, see variance_constant()
};

// V = ((K_1^2)^2 K_2^0 + (K_1^1)^2 K_2^2 - 2 K_1^1 K_1^2 K_2^1) / (K_1^2 - (K_1^1)^2)^2.
// Throws NumericalError("degenerate kernel design") when the denominator vanishes.
double variance_constant(const KernelMoments& m);

// Leading local-linear bias constant ((K_1^2)^2 - K_1^3 K_1^1) / (K_1^2 - (K_1^1)^2).
// Equals K_1^2 for symmetric kernels.
double bias_constant(const KernelMoments& m);

/// Immutable kernel descriptor. Copies share the cached moment table.
///
/// Built-in kernels evaluate inline; custom kernels go through a
/// std::function and get their moments by adaptive quadrature on a
/// truncated support.
class Kernel {
 public:
  static Kernel gaussian();
  static Kernel epanechnikov();
  // Validates K >= 0 and unit mass; throws ValidationError otherwise.
  static Kernel custom(std::string name, std::function<double(double)> density);
  // "gaussian" | "epanechnikov"
  static Kernel from_name(std::string_view name);

  KernelId id() const noexcept { return state_->id; }
  const std::string& name() const noexcept { return state_->name; }

  double operator()(double u) const {
    switch (state_->id) {
      case KernelId::gaussian:
        return kInvSqrt2Pi * std::exp(-0.5 * u * u);
      case KernelId::epanechnikov:
        return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
      case KernelId::custom:
        break;
    }
    return state_->density(u);
  }

  // |u| beyond which K(u) < 1e-16 (exactly zero for compact kernels).
  double support_radius() const noexcept { return state_->radius; }

  bool symmetric() const noexcept { return state_->symmetric; }

  const KernelMoments& moments() const noexcept { return state_->moments; }

 private:
  static constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

  struct State {
    KernelId id;
    std::string name;
    std::function<double(double)> density;
    double radius;
    bool symmetric;
    KernelMoments moments;
  };

  explicit Kernel(std::shared_ptr<const State> s) : state_(std::move(s)) {}

  std::shared_ptr<const State> state_;
};

// \int K^power(u) u^degree du. Closed form for built-in kernels, quadrature otherwise.
// power in {1,2}; degree <= 3 for power 1, <= 2 for power 2.
double kernel_moment(const Kernel& k, int power, int degree);

// Same integral, always by adaptive Gauss-Kronrod quadrature over
// [-support_radius, support_radius] (absolute error <= 1e-10).
// Throws NumericalError naming the moment on non-convergence.
double quadrature_moment(const Kernel& k, int power, int degree);

}  // namespace jdsmooth
