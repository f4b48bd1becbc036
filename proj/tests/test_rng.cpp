#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "jdsmooth/rng.hpp"
#include "jdsmooth/stats.hpp"

using namespace jdsmooth;

namespace {

template <class F>
std::pair<double, double> moments(F draw, int n) {
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double v = draw();
    s += v;
    ss += v * v;
  }
  const double m = s / n;
  return {m, ss / n - m * m};
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
  RandomStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs |= x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIsOpenInterval) {
  RandomStream r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  RandomStream r(7);
  const auto [m, v] = moments([&] { return r.normal(); }, 200000);
  EXPECT_NEAR(m, 0.0, 0.01);
  EXPECT_NEAR(v, 1.0, 0.015);
}

TEST(Rng, GammaMoments) {
  RandomStream r(8);
  for (double shape : {0.043478, 0.5, 3.0, 17.0}) {
    const double scale = 0.23;
    const auto [m, v] = moments([&] { return r.gamma(shape, scale); }, 200000);
    EXPECT_NEAR(m / (shape * scale), 1.0, 0.03) << shape;
    EXPECT_NEAR(v / (shape * scale * scale), 1.0, 0.08) << shape;
  }
}

TEST(Rng, PoissonMoments) {
  RandomStream r(9);
  for (double mean : {0.02, 3.0, 9.5, 10.5, 60.0}) {
    const auto [m, v] = moments([&] { return static_cast<double>(r.poisson(mean)); }, 200000);
    EXPECT_NEAR(m / mean, 1.0, 0.03) << mean;
    EXPECT_NEAR(v / mean, 1.0, 0.05) << mean;
  }
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(Rng, CauchyQuartiles) {
  RandomStream r(10);
  std::vector<double> v(100000);
  for (auto& x : v) x = r.cauchy(1.0, 2.0);
  EXPECT_NEAR(quantile(v, 0.5), 1.0, 0.05);
  EXPECT_NEAR(quantile(v, 0.75), 3.0, 0.1);
  EXPECT_NEAR(quantile(v, 0.25), -1.0, 0.1);
}

TEST(Rng, DerivedStreamsAreUncorrelated) {
  const int n = 10000;
  for (std::uint64_t k = 0; k < 5; ++k) {
    RandomStream a(derive_seed(99, k)), b(derive_seed(99, k + 1));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = a.normal();
      y[i] = b.normal();
    }
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.05);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
