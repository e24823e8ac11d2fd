#pragma once

#include <cstdint>
#include <random>

namespace darl {

/// SplitMix64 finalizer. A bijective 64-bit mixer; used as a counter-based
/// generator for seed splitting and for stateless per-(seed, counter) draws.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`: master XOR index, pushed through
/// the counter-based mixer. Streams with distinct indices are independent
/// for all practical purposes.
constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return deriveSeed(deriveSeed(master, a), b);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
constexpr double toUnit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stateless uniform in [0, 1) keyed by (seed, counter).
constexpr double hashUniform(std::uint64_t seed, std::uint64_t counter) {
  return toUnit(splitmix64(seed ^ splitmix64(counter ^ 0xD1B54A32D192ED03ULL)));
}

/// Explicit per-worker random source. Never shared between threads.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform() { return toUnit(engine_()); }

  double normal() { return normal_(engine_); }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::uint64_t binomial(std::uint64_t trials, double p) {
    if (trials == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<std::uint64_t>(trials, p)(engine_);
  }

  /// Child stream, deterministic in the parent's current state.
  Rng split() { return Rng(engine_()); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace darl
