#pragma once

#include <cstdint>
#include <random>

namespace jdsmooth {

// SplitMix64 finalizer; used to decorrelate user seeds and derive substreams.
std::uint64_t mix64(std::uint64_t z) noexcept;

// Seed of substream `index` under `master`. Distinct indices give unrelated
// seeds, so replicates can be generated in any order or in parallel.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// A single random stream: mt19937_64 plus hand-written variate generators.
///
/// The variate algorithms are fixed here (not delegated to <random>
/// distributions, whose output is implementation-defined) so a seed
/// reproduces the same path on every standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  // Standard normal, Marsaglia polar method.
  double normal() noexcept;
  // Gamma(shape, scale), Marsaglia-Tsang; shape < 1 via the U^(1/shape) boost in log space.
  double gamma(double shape, double scale) noexcept;
  // Poisson(mean): multiplicative inversion for small means, PTRS (Hormann 1993) otherwise.
  std::uint64_t poisson(double mean) noexcept;
  double cauchy(double location, double scale) noexcept;

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace jdsmooth
