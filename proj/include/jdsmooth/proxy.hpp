#pragma once

#include <span>
#include <vector>

namespace jdsmooth {

enum class ProxySource { simulated, empirical_log };

// Observable stand-in for the latent state: xt[i] = (y[i+1] - y[i]) / delta.
struct ProxySeries {
  double delta = 0.0;
  std::vector<double> xt;
  ProxySource source = ProxySource::simulated;

  std::size_t size() const noexcept { return xt.size(); }
};

// Five-minute bars over a 48-bar trading day, time unit = one day.
inline constexpr double kFiveMinuteDelta = 1.0 / 48.0;

// Requires y.size() >= 3 and delta > 0; non-finite input throws ValidationError with the index.
ProxySeries build_proxy(std::span<const double> y, double delta);

// build_proxy applied to log(prices); non-positive price throws with its row index.
ProxySeries build_log_proxy(std::span<const double> prices, double delta);

}  // namespace jdsmooth
