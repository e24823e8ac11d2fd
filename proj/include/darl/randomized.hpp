#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <variant>
#include <vector>

#include "darl/point.hpp"
#include "darl/rng.hpp"

namespace darl {

/// One realization R of a classifier's internal randomness. Classifiers
/// expand it into whatever they need (noise vectors, coin flips) through
/// counter-based hashing, so a draw is a complete, serializable record.
using Draw = std::uint64_t;

/// Randomness with finitely many outcomes; allows exact expectations.
struct FiniteRandomness {
  std::vector<Draw> draws;
  std::vector<double> probs;
};

/// Uniform 64-bit draws from a seeded stream.
struct StreamRandomness {};

class RandomnessDistribution {
 public:
  RandomnessDistribution() = default;
  explicit RandomnessDistribution(FiniteRandomness finite) : dist_(std::move(finite)) {
    const auto& f = std::get<FiniteRandomness>(dist_);
    if (f.draws.empty() || f.draws.size() != f.probs.size()) {
      throw Error("FiniteRandomness: draws and probs must be nonempty and aligned");
    }
    const double total = std::accumulate(f.probs.begin(), f.probs.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw Error("FiniteRandomness: probabilities must sum to 1");
  }

  bool isFinite() const { return std::holds_alternative<FiniteRandomness>(dist_); }
  const FiniteRandomness& finite() const { return std::get<FiniteRandomness>(dist_); }

  Draw sample(Rng& rng) const {
    if (const auto* f = std::get_if<FiniteRandomness>(&dist_)) {
      double u = rng.uniform();
      for (std::size_t i = 0; i < f->draws.size(); ++i) {
        if (u < f->probs[i]) return f->draws[i];
        u -= f->probs[i];
      }
      return f->draws.back();
    }
    return rng();
  }

 private:
  std::variant<StreamRandomness, FiniteRandomness> dist_;
};

/// h(x', R): deterministic given (instance, draw). Labels are arbitrary ints.
struct RandomizedClassifier {
  std::function<Label(const Point&, Draw)> evaluate;
  RandomnessDistribution randomness;
};

}  // namespace darl
