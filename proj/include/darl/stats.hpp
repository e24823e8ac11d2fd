#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace darl::stats {

/// Standard normal CDF.
inline double normalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion. z = 1.96 gives 95%.
inline Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = 1.96) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Log of the binomial pmf, computed through lgamma.
inline double logBinomialPmf(std::uint64_t n, std::uint64_t k, double p) {
  if (k > n) return -INFINITY;
  if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) +
         kk * std::log(p) + (nn - kk) * std::log1p(-p);
}

/// P[Binomial(n, p) >= k], summed exactly in log space.
inline double binomialUpperTail(std::uint64_t n, double p, std::uint64_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  double maxLog = -INFINITY;
  for (std::uint64_t i = k; i <= n; ++i) maxLog = std::max(maxLog, logBinomialPmf(n, i, p));
  if (maxLog == -INFINITY) return 0.0;
  double acc = 0.0;
  for (std::uint64_t i = k; i <= n; ++i) acc += std::exp(logBinomialPmf(n, i, p) - maxLog);
  return std::min(1.0, acc * std::exp(maxLog));
}

/// Streaming mean/variance (Welford).
class MeanAccumulator {
 public:
  void add(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
  }
  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double stderror() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// 3-sigma binomial slack around a bound p, for N repetitions.
inline double threeSigma(double p, std::uint64_t reps) {
  const double q = std::clamp(p, 0.0, 1.0);
  return 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(reps));
}

}  // namespace darl::stats
