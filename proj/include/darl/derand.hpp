#pragma once

// Derandomization of randomized classifiers (plurality over pre-sampled
// draws) and of randomized certifiers (median over pre-sampled draws), plus
// the Gaussian-smoothed classifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "darl/hypo.hpp"
#include "darl/loss.hpp"
#include "darl/randomized.hpp"
#include "darl/rng.hpp"

namespace darl {

/// t = ceil((100 / eta^2) * ln(aSize / delta)), at least 1.
inline std::size_t requiredTrials(double eta, std::size_t aSize, double delta) {
  if (!(eta > 0.0 && eta < 0.5)) throw Error("requiredTrials: eta must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("requiredTrials: delta must lie in (0, 1)");
  if (aSize == 0) throw Error("requiredTrials: |A(x)| must be positive");
  const double t = std::ceil(100.0 / (eta * eta) * std::log(static_cast<double>(aSize) / delta));
  return t < 1.0 ? 1 : static_cast<std::size_t>(t);
}

/// Most frequent label; ties go to the smallest label.
inline Label plurality(std::span<const Label> votes) {
  if (votes.empty()) throw Error("plurality: no votes");
  std::map<Label, std::size_t> counts;
  for (Label v : votes) ++counts[v];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

/// Lower median: element (t - 1) / 2 of the sorted values.
inline double lowerMedian(std::vector<double> values) {
  if (values.empty()) throw Error("lowerMedian: no values");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

/// h^{(R_1..R_t)}: a plurality vote of the base classifier over t draws that
/// were fixed once and never change.
class DerandClassifier {
 public:
  DerandClassifier(RandomizedClassifier base, std::vector<Draw> seeds)
      : base_(std::move(base)), seeds_(std::move(seeds)) {
    if (seeds_.empty()) throw Error("DerandClassifier: needs t >= 1 seeds");
  }

  std::map<Label, std::size_t> votes(const Point& x) const {
    std::map<Label, std::size_t> counts;
    for (Draw r : seeds_) ++counts[base_.evaluate(x, r)];
    return counts;
  }

  Label operator()(const Point& x) const {
    // Label sets are tiny; a flat tally beats a map here.
    std::vector<std::pair<Label, std::size_t>> tally;
    for (Draw r : seeds_) {
      const Label l = base_.evaluate(x, r);
      auto it = std::find_if(tally.begin(), tally.end(), [l](const auto& p) { return p.first == l; });
      if (it == tally.end()) tally.emplace_back(l, 1);
      else ++it->second;
    }
    auto best = tally.begin();
    for (auto it = tally.begin(); it != tally.end(); ++it) {
      if (it->second > best->second || (it->second == best->second && it->first < best->first)) best = it;
    }
    return best->first;
  }

  const std::vector<Draw>& seeds() const { return seeds_; }
  std::size_t t() const { return seeds_.size(); }

 private:
  RandomizedClassifier base_;
  std::vector<Draw> seeds_;
};

inline DerandClassifier derandomizeClassifier(RandomizedClassifier base, std::size_t t, Rng& rng) {
  if (t == 0) throw Error("derandomizeClassifier: t must be >= 1");
  std::vector<Draw> seeds;
  seeds.reserve(t);
  for (std::size_t i = 0; i < t; ++i) seeds.push_back(base.randomness.sample(rng));
  return {std::move(base), std::move(seeds)};
}

/// A clean example, its probability under D, and its finite adversary set A(x).
struct AdversarialExample {
  LabeledExample example;
  double prob = 0.0;
  std::vector<Point> aSet;
};

class AdversarialTask {
 public:
  explicit AdversarialTask(std::vector<AdversarialExample> examples) : examples_(std::move(examples)) {
    if (examples_.empty()) throw Error("AdversarialTask: empty data distribution");
    double total = 0.0;
    for (const auto& e : examples_) {
      if (e.aSet.empty()) throw Error("AdversarialTask: empty A(x)");
      if (!(e.prob >= 0.0)) throw Error("AdversarialTask: negative probability");
      total += e.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("AdversarialTask: probabilities must sum to 1");
  }

  const std::vector<AdversarialExample>& examples() const { return examples_; }

  /// sup over x of |A(x)|, the size the single t must serve.
  std::size_t maxASize() const {
    std::size_t s = 0;
    for (const auto& e : examples_) s = std::max(s, e.aSet.size());
    return s;
  }

 private:
  std::vector<AdversarialExample> examples_;
};

/// Pr_{(x,y)~D}[exists x' in A(x): det(x') != y], exhaustive over A(x).
template <class Classifier>
double evaluateDerandDr(const Classifier& det, const AdversarialTask& task) {
  double total = 0.0;
  for (const auto& e : task.examples()) {
    const bool fooled = std::any_of(e.aSet.begin(), e.aSet.end(),
                                    [&](const Point& xp) { return det(xp) != e.example.y; });
    if (fooled) total += e.prob;
  }
  return std::clamp(total, 0.0, 1.0);
}

/// epsilon(eta) = Pr_D[score(x, y) >= 1/2 - eta] for per-example scores
/// aligned with task.examples() (epsilon(x,y) or gamma(rho,x,y)).
inline double epsilonEta(const AdversarialTask& task, std::span<const double> perExample, double eta) {
  if (perExample.size() != task.examples().size()) throw Error("epsilonEta: score count mismatch");
  double mass = 0.0;
  for (std::size_t i = 0; i < perExample.size(); ++i) {
    if (perExample[i] >= 0.5 - eta) mass += task.examples()[i].prob;
  }
  return mass;
}

/// rho(x', R) >= 0 together with the ground-truth robust-region size.
struct RandomizedCertifier {
  std::function<double(const Point&, Draw)> evaluate;
  RandomnessDistribution randomness;
  std::function<double(const Point&)> robreg;
};

/// rho^{(R_1..R_t)}: lower median of rho over fixed draws.
class MedianCertifier {
 public:
  MedianCertifier(RandomizedCertifier cert, std::vector<Draw> seeds)
      : cert_(std::move(cert)), seeds_(std::move(seeds)) {
    if (seeds_.empty()) throw Error("MedianCertifier: needs t >= 1 seeds");
  }

  double operator()(const Point& x) const {
    std::vector<double> radii;
    radii.reserve(seeds_.size());
    for (Draw r : seeds_) {
      const double rho = cert_.evaluate(x, r);
      if (rho < 0.0) throw Error("MedianCertifier: negative radius");
      radii.push_back(rho);
    }
    return lowerMedian(std::move(radii));
  }

  double robreg(const Point& x) const { return cert_.robreg(x); }
  const std::vector<Draw>& seeds() const { return seeds_; }

 private:
  RandomizedCertifier cert_;
  std::vector<Draw> seeds_;
};

inline MedianCertifier derandomizeCertifier(RandomizedCertifier cert, std::size_t t, Rng& rng) {
  if (t == 0) throw Error("derandomizeCertifier: t must be >= 1");
  std::vector<Draw> seeds;
  seeds.reserve(t);
  for (std::size_t i = 0; i < t; ++i) seeds.push_back(cert.randomness.sample(rng));
  return {std::move(cert), std::move(seeds)};
}

enum class BandStatus { inBand, outOfBand, undefined };

/// Where radius / robreg falls relative to [1 - beta, 1 + alpha]. A zero
/// robust region is undefined with a zero radius and out of band otherwise.
inline BandStatus bandStatus(double radius, double robreg, double alpha, double beta) {
  if (robreg == 0.0) return radius == 0.0 ? BandStatus::undefined : BandStatus::outOfBand;
  const double ratio = radius / robreg;
  return (ratio >= 1.0 - beta && ratio <= 1.0 + alpha) ? BandStatus::inBand : BandStatus::outOfBand;
}

struct BandResult {
  double value = 0.0;          // E_D[exists x' in A(x) out of band]
  std::size_t undefined = 0;   // (x, x') pairs skipped for robreg = radius = 0
};

/// Exact expectation over D of the indicator that some x' in A(x) has a
/// median radius outside the band.
template <class Certifier>
BandResult evaluateCertBand(const Certifier& det, const AdversarialTask& task, double alpha, double beta) {
  BandResult r;
  for (const auto& e : task.examples()) {
    bool out = false;
    for (const auto& xp : e.aSet) {
      const auto s = bandStatus(det(xp), det.robreg(xp), alpha, beta);
      if (s == BandStatus::undefined) ++r.undefined;
      out = out || s == BandStatus::outOfBand;
    }
    if (out) r.value += e.prob;
  }
  r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

/// Isotropic N(0, sigma^2 I) noise vector expanded from one draw by
/// counter-based Box-Muller.
inline Point gaussianNoise(Draw draw, std::size_t dim, double sigma) {
  std::vector<double> z(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    const double u1 = 1.0 - hashUniform(draw, 2 * i);  // (0, 1]
    const double u2 = hashUniform(draw, 2 * i + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    z[i] = sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dim) z[i + 1] = sigma * r * std::sin(2.0 * std::numbers::pi * u2);
  }
  return Point(std::span<const double>(z));
}

/// g(x) = argmax_c Pr(f(x + eta) = c), realized as a randomized classifier
/// whose single draw is one noise vector, and estimated by a plurality over
/// `trials` fresh draws.
class SmoothedClassifier {
 public:
  SmoothedClassifier(Hypothesis base, double sigma, std::size_t trials)
      : base_(std::move(base)), sigma_(sigma), trials_(trials) {
    if (!(sigma > 0.0)) throw Error("smoothedClassifier: sigma must be > 0");
    if (trials == 0) throw Error("smoothedClassifier: trials must be >= 1");
  }

  RandomizedClassifier randomized() const {
    return {[base = base_, sigma = sigma_](const Point& x, Draw r) {
              return base(x + gaussianNoise(r, x.size(), sigma));
            },
            RandomnessDistribution{}};
  }

  std::map<Label, std::size_t> votes(const Point& x, Rng& rng) const {
    std::map<Label, std::size_t> counts;
    const auto h = randomized();
    for (std::size_t i = 0; i < trials_; ++i) ++counts[h.evaluate(x, rng())];
    return counts;
  }

  Label predict(const Point& x, Rng& rng) const {
    const auto counts = votes(x, rng);
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    return best->first;
  }

  const Hypothesis& base() const { return base_; }
  double sigma() const { return sigma_; }
  std::size_t trials() const { return trials_; }

 private:
  Hypothesis base_;
  double sigma_;
  std::size_t trials_;
};

inline SmoothedClassifier smoothedClassifier(Hypothesis base, double sigma, std::size_t trials) {
  return {std::move(base), sigma, trials};
}

}  // namespace darl
