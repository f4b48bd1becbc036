#include "jdsmooth/proxy.hpp"

#include <cmath>
#include <string>

#include "jdsmooth/errors.hpp"

namespace jdsmooth {

ProxySeries build_proxy(std::span<const double> y, double delta) {
  if (y.size() < 3) throw ValidationError("proxy needs at least 3 integrated observations");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("observation step must be > 0");
  ProxySeries out;
  out.delta = delta;
  out.xt.resize(y.size() - 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw ValidationError("non-finite observation at index " + std::to_string(i));
  }
  for (std::size_t i = 0; i + 1 < y.size(); ++i) out.xt[i] = (y[i + 1] - y[i]) / delta;
  return out;
}

ProxySeries build_log_proxy(std::span<const double> prices, double delta) {
  std::vector<double> logs(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw ValidationError("non-positive or non-finite price at row " + std::to_string(i));
    }
    logs[i] = std::log(prices[i]);
  }
  ProxySeries out = build_proxy(logs, delta);
  out.source = ProxySource::empirical_log;
  return out;
}

}  // namespace jdsmooth
