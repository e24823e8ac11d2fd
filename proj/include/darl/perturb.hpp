#pragma once

// Perturbation distributions, the cover models over them, and total
// variation machinery.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "darl/point.hpp"
#include "darl/rng.hpp"
#include "darl/stats.hpp"

namespace darl {

inline constexpr double kProbTolerance = 1e-12;
inline constexpr double kRenormalizeTolerance = 1e-9;

/// Finite-support distribution over instance points. Immutable.
class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<Point> support, std::vector<double> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.empty()) throw Error("FiniteDistribution: empty support");
    if (support_.size() != probs_.size()) {
      throw Error("FiniteDistribution: support and probs differ in length");
    }
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw Error("FiniteDistribution: negative or non-finite probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kRenormalizeTolerance) {
      throw Error("FiniteDistribution: probabilities sum to " + std::to_string(total));
    }
    for (double& p : probs_) p /= total;

    order_.resize(support_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) { return support_[a] < support_[b]; });
    for (std::size_t i = 1; i < order_.size(); ++i) {
      if (support_[order_[i - 1]] == support_[order_[i]]) {
        throw Error("FiniteDistribution: duplicate support point");
      }
    }
    cumulative_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
  }

  static FiniteDistribution pointMass(Point x) { return {{x}, {1.0}}; }

  static FiniteDistribution uniform(std::vector<Point> support) {
    const double p = 1.0 / static_cast<double>(support.size());
    std::vector<double> probs(support.size(), p);
    return {std::move(support), std::move(probs)};
  }

  const std::vector<Point>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return support_.size(); }

  /// Position of z in support(), if present.
  std::optional<std::size_t> find(const Point& z) const {
    auto it = std::lower_bound(order_.begin(), order_.end(), z,
                               [&](std::size_t i, const Point& p) { return support_[i] < p; });
    if (it == order_.end() || !(support_[*it] == z)) return std::nullopt;
    return *it;
  }

  /// Mass at z; zero off the support.
  double prob(const Point& z) const {
    auto i = find(z);
    return i ? probs_[*i] : 0.0;
  }

  std::size_t drawIndex(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto i = static_cast<std::size_t>(it - cumulative_.begin());
    if (i >= support_.size()) i = support_.size() - 1;
    // Skip zero-mass atoms that upper_bound can land on through rounding.
    while (probs_[i] == 0.0 && i > 0) --i;
    return i;
  }

  const Point& draw(Rng& rng) const { return support_[drawIndex(rng)]; }

  /// Multinomial counts of `count` i.i.d. draws, indexed like support().
  /// Equal in distribution to tallying `count` calls to draw().
  std::vector<std::uint64_t> drawCounts(std::uint64_t count, Rng& rng) const {
    std::vector<std::uint64_t> counts(support_.size(), 0);
    std::uint64_t left = count;
    double massLeft = 1.0;
    for (std::size_t i = 0; i + 1 < support_.size() && left > 0; ++i) {
      const double p = massLeft > 0.0 ? std::clamp(probs_[i] / massLeft, 0.0, 1.0) : 0.0;
      counts[i] = rng.binomial(left, p);
      left -= counts[i];
      massLeft -= probs_[i];
    }
    counts.back() += left;
    return counts;
  }

 private:
  std::vector<Point> support_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::vector<std::size_t> order_;
};

/// Isotropic Gaussian N(center, sigma^2 I). Sampled by Monte Carlo only.
class GaussianDistribution {
 public:
  GaussianDistribution(Point center, double sigma) : center_(center), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error("GaussianDistribution: sigma must be > 0");
  }

  const Point& center() const { return center_; }
  double sigma() const { return sigma_; }

  Point draw(Rng& rng) const {
    Point z = center_;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += sigma_ * rng.normal();
    return z;
  }

 private:
  Point center_;
  double sigma_;
};

using PerturbationDistribution = std::variant<FiniteDistribution, GaussianDistribution>;

inline bool isFinite(const PerturbationDistribution& d) {
  return std::holds_alternative<FiniteDistribution>(d);
}

/// `count` i.i.d. draws; deterministic given the state of `rng`.
inline std::vector<Point> sample(const PerturbationDistribution& dist, std::size_t count, Rng& rng) {
  if (count == 0) throw Error("sample: count must be >= 1");
  std::vector<Point> out;
  out.reserve(count);
  std::visit([&](const auto& d) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(d.draw(rng));
  }, dist);
  return out;
}

/// Which side of a family a caller trains or evaluates on.
enum class FamilyView { trueSet, repSet };

/// Per-example perturbation family: U(x), optionally R(x), and the cap k.
struct DistributionFamily {
  std::vector<PerturbationDistribution> trueSet;
  std::optional<std::vector<PerturbationDistribution>> repSet;
  std::size_t k = 1;

  /// Throws unless the family is well-formed. In the bounded model |U(x)| <= k too.
  void validate(bool boundedModel) const {
    if (k == 0) throw Error("DistributionFamily: k must be positive");
    if (trueSet.empty()) throw Error("DistributionFamily: empty true set");
    if (repSet) {
      if (repSet->empty()) throw Error("DistributionFamily: empty representative set");
      if (repSet->size() > k) throw Error("DistributionFamily: |repSet| exceeds k");
    }
    if (boundedModel && trueSet.size() > k) throw Error("DistributionFamily: |trueSet| exceeds k");
  }

  const std::vector<PerturbationDistribution>& view(FamilyView v) const {
    if (v == FamilyView::trueSet) return trueSet;
    if (!repSet) throw Error("DistributionFamily: no representative set");
    return *repSet;
  }
};

/// Half the L1 distance over the union of supports.
inline double tvDistance(const FiniteDistribution& a, const FiniteDistribution& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a.probs()[i] - b.prob(a.support()[i]));
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!a.find(b.support()[i])) sum += b.probs()[i];
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

/// TV distance between N(c, s^2 I) and N(c', s^2 I) with |c - c'| = delta:
/// 2*Phi(delta / (2 sigma)) - 1.
inline double gaussianShiftTv(double delta, double sigma) {
  if (delta < 0.0) throw Error("gaussianShiftTv: delta must be >= 0");
  if (!(sigma > 0.0)) throw Error("gaussianShiftTv: sigma must be > 0");
  return std::erf(delta / (2.0 * sigma * std::numbers::sqrt2));
}

struct RepresentativeCover {
  std::vector<std::size_t> indices;  // into the input family
  std::vector<FiniteDistribution> reps;
  double radius = 0.0;               // achieved epsilon'
};

/// Greedy farthest-point k-center under TV. First center is index 0; ties go
/// to the lowest index. Stops early once every member is covered exactly.
inline RepresentativeCover buildRepresentativeCover(const std::vector<FiniteDistribution>& family,
                                                    std::size_t k) {
  if (family.empty()) throw Error("buildRepresentativeCover: empty family");
  if (k == 0) throw Error("buildRepresentativeCover: k must be >= 1");
  RepresentativeCover cover;
  std::vector<double> nearest(family.size(), INFINITY);
  std::size_t next = 0;
  while (true) {
    cover.indices.push_back(next);
    cover.reps.push_back(family[next]);
    for (std::size_t i = 0; i < family.size(); ++i) {
      nearest[i] = std::min(nearest[i], tvDistance(family[i], family[next]));
    }
    auto far = std::max_element(nearest.begin(), nearest.end());
    cover.radius = *far;
    if (cover.indices.size() >= k || *far == 0.0) break;
    next = static_cast<std::size_t>(far - nearest.begin());
  }
  return cover;
}

/// First support point of u whose mass exceeds the pointwise max of the reps.
inline std::optional<Point> pointwiseCoverViolation(const FiniteDistribution& u,
                                                    const std::vector<FiniteDistribution>& reps) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point& z = u.support()[i];
    double envelope = 0.0;
    for (const auto& r : reps) envelope = std::max(envelope, r.prob(z));
    if (u.probs()[i] > envelope + kProbTolerance) return z;
  }
  return std::nullopt;
}

inline bool verifyPointwiseCover(const FiniteDistribution& u, const std::vector<FiniteDistribution>& reps) {
  return !pointwiseCoverViolation(u, reps).has_value();
}

}  // namespace darl
