#include "jdsmooth/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jdsmooth/errors.hpp"

namespace jdsmooth {
namespace {

constexpr double kQuadratureTol = 1e-10;
constexpr double kTailThreshold = 1e-16;

void check_indices(int power, int degree) {
  if ((power == 1 && degree >= 0 && degree <= 3) || (power == 2 && degree >= 0 && degree <= 2)) {
    return;
  }
  throw ValidationError("kernel moment K_" + std::to_string(power) + "^" + std::to_string(degree) +
                        " is outside the supported range");
}

double integrate(const std::function<double(double)>& density, double radius, int power, int degree) {
  auto integrand = [&](double u) {
    const double k = density(u);
    const double kp = power == 1 ? k : k * k;
    return kp * std::pow(u, degree);
  };
  // Split at the origin so compact kernels with a kink at 0 (or a peak) converge quickly.
  double err_left = 0.0;
  double err_right = 0.0;
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double left = Quad::integrate(integrand, -radius, 0.0, 20, 1e-14, &err_left);
  const double right = Quad::integrate(integrand, 0.0, radius, 20, 1e-14, &err_right);
  const double value = left + right;
  if (!std::isfinite(value) || err_left + err_right > kQuadratureTol) {
    throw NumericalError("quadrature for kernel moment K_" + std::to_string(power) + "^" +
                         std::to_string(degree) + " did not converge (error estimate " +
                         std::to_string(err_left + err_right) + ")");
  }
  return value;
}

// Smallest power-of-two radius R >= 1 with K(+-R) < 1e-16.
double find_radius(const std::function<double(double)>& density) {
  for (double r = 1.0; r <= 1e4; r *= 2.0) {
    if (density(r) < kTailThreshold && density(-r) < kTailThreshold) return r;
  }
  throw NumericalError("custom kernel does not decay below 1e-16 within |u| <= 1e4; not integrable");
}

KernelMoments moments_by_quadrature(const std::function<double(double)>& density, double radius) {
  KernelMoments m;
  for (int j = 0; j < 4; ++j) m.k1[j] = integrate(density, radius, 1, j);
  for (int j = 0; j < 3; ++j) m.k2[j] = integrate(density, radius, 2, j);
  m.v = variance_constant(m);
  return m;
}

}  // namespace

double variance_constant(const KernelMoments& m) {
  const double denom = m.k1[2] - m.k1[1] * m.k1[1];
  if (!(std::abs(denom) > 1e-14)) throw NumericalError("degenerate kernel design");
  const double num = m.k1[2] * m.k1[2] * m.k2[0] + m.k1[1] * m.k1[1] * m.k2[2] -
                     2.0 * m.k1[1] * m.k1[2] * m.k2[1];
  return num / (denom * denom);
}

double bias_constant(const KernelMoments& m) {
  const double denom = m.k1[2] - m.k1[1] * m.k1[1];
  if (!(std::abs(denom) > 1e-14)) throw NumericalError("degenerate kernel design");
  return (m.k1[2] * m.k1[2] - m.k1[3] * m.k1[1]) / denom;
}

Kernel Kernel::gaussian() {
  static const auto state = [] {
    constexpr double sqrt_pi = 1.0 / std::numbers::inv_sqrtpi;
    KernelMoments m;
    m.k1 = {1.0, 0.0, 1.0, 0.0};
    m.k2 = {1.0 / (2.0 * sqrt_pi), 0.0, 1.0 / (4.0 * sqrt_pi)};
    m.v = variance_constant(m);
    // exp(-R^2/2)/sqrt(2 pi) = 1e-16  =>  R = sqrt(-2 log(1e-16 sqrt(2 pi)))
    const double radius = std::sqrt(-2.0 * std::log(kTailThreshold / kInvSqrt2Pi));
    return std::make_shared<const State>(State{
        KernelId::gaussian, "gaussian",
        [](double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }, radius, true, m});
  }();
  return Kernel(state);
}

Kernel Kernel::epanechnikov() {
  static const auto state = [] {
    KernelMoments m;
    m.k1 = {1.0, 0.0, 0.2, 0.0};
    m.k2 = {0.6, 0.0, 3.0 / 35.0};
    m.v = variance_constant(m);
    return std::make_shared<const State>(State{
        KernelId::epanechnikov, "epanechnikov",
        [](double u) { return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0; }, 1.0, true, m});
  }();
  return Kernel(state);
}

Kernel Kernel::custom(std::string name, std::function<double(double)> density) {
  if (!density) throw ValidationError("custom kernel '" + name + "' has no density");
  const double radius = find_radius(density);
  bool symmetric = true;
  for (int k = 0; k <= 400; ++k) {
    const double u = radius * k / 400.0;
    const double a = density(u);
    const double b = density(-u);
    if (!(a >= 0.0) || !(b >= 0.0)) {
      throw ValidationError("custom kernel '" + name + "' takes a negative value near u=" +
                            std::to_string(u));
    }
    if (std::abs(a - b) > 1e-14 * std::max(1.0, std::abs(a))) symmetric = false;
  }
  KernelMoments m = moments_by_quadrature(density, radius);
  if (std::abs(m.k1[0] - 1.0) > 1e-8) {
    throw ValidationError("custom kernel '" + name + "' does not integrate to one (mass " +
                          std::to_string(m.k1[0]) + ")");
  }
  return Kernel(std::make_shared<const State>(
      State{KernelId::custom, std::move(name), std::move(density), radius, symmetric, m}));
}

Kernel Kernel::from_name(std::string_view name) {
  if (name == "gaussian") return gaussian();
  if (name == "epanechnikov") return epanechnikov();
  throw ValidationError("unknown kernel '" + std::string(name) + "' (expected gaussian|epanechnikov)");
}

double kernel_moment(const Kernel& k, int power, int degree) {
  check_indices(power, degree);
  const auto& m = k.moments();
  return power == 1 ? m.k1[degree] : m.k2[degree];
}

double quadrature_moment(const Kernel& k, int power, int degree) {
  check_indices(power, degree);
  return integrate([&k](double u) { return k(u); }, k.support_radius(), power, degree);
}

}  // namespace jdsmooth
