#pragma once

#include <cmath>
#include <functional>
#include <vector>

// Independent reference computations used only by the tests.
namespace oracle {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Weighted least squares of y on (1, z) with weights w by explicit 2x2 normal equations.
inline double wls_intercept(const std::vector<double>& w, const std::vector<double>& z, const std::vector<double>& y) {
  double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    a00 += w[i];
    a01 += w[i] * z[i];
    a11 += w[i] * z[i] * z[i];
    b0 += w[i] * y[i];
    b1 += w[i] * z[i] * y[i];
  }
  // Cramer's rule.
  return (b0 * a11 - a01 * b1) / (a00 * a11 - a01 * a01);
}

inline double gauss(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI); }

}  // namespace oracle
