#pragma once

// The learning algorithm: draw S_c ~ D^n, add m perturbations per family
// member, then minimize DR_S exactly over every behavior the class realizes.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "darl/hypo.hpp"
#include "darl/loss.hpp"
#include "darl/perturb.hpp"
#include "darl/rng.hpp"

namespace darl {

struct LearnConfig {
  std::size_t n = 1;
  std::size_t m = 1;
  FamilyView sampleFrom = FamilyView::trueSet;
  HypothesisClass cls = HypothesisClass::thresholds();
  std::uint64_t seed = 0;
};

/// Draws n clean examples and, for each, m i.i.d. perturbations from every
/// member of the chosen family view. Consumes `rng` in a fixed order: clean
/// index, then member by member.
inline SampleSet drawTrainingSet(const TaskInstance& task, const LearnConfig& cfg, Rng& rng) {
  if (cfg.n == 0 || cfg.m == 0) throw Error("drawTrainingSet: n and m must be >= 1");
  if (cfg.sampleFrom == FamilyView::repSet && !task.hasRepSets()) {
    throw Error("drawTrainingSet: sampling from representatives but some example has no repSet");
  }
  SampleSet s;
  s.m = cfg.m;
  s.source.reserve(cfg.n);
  s.clean.reserve(cfg.n);
  s.perturbed.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const std::size_t e = task.drawIndex(rng);
    s.source.push_back(e);
    s.clean.push_back(task[e].example);
    std::vector<std::vector<Point>> members;
    for (const auto& d : task[e].family.view(cfg.sampleFrom)) members.push_back(sample(d, cfg.m, rng));
    s.perturbed.push_back(std::move(members));
  }
  return s;
}

/// Sorted, duplicate-free set of every point in S (clean and perturbed).
inline std::vector<Point> samplePoints(const SampleSet& s) {
  std::vector<Point> pts;
  pts.reserve(s.totalPoints());
  for (std::size_t i = 0; i < s.n(); ++i) {
    pts.push_back(s.clean[i].x);
    for (const auto& draws : s.perturbed[i]) pts.insert(pts.end(), draws.begin(), draws.end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

struct DrermResult {
  Hypothesis hypothesis;
  std::uint64_t errorSum = 0;  // n * m * DR_S
  std::size_t behaviors = 0;
};

/// Exact DRERM: enumerate behaviors on all of S, score each by DR_S, and
/// return the first minimizer in canonical witness order.
inline DrermResult drermDetailed(const HypothesisClass& cls, const SampleSet& s) {
  s.validate();
  const auto universe = samplePoints(s);
  const auto behaviors = enumerateBehaviors(cls, universe);
  const IndexedSample indexed(s, universe);
  std::size_t best = 0;
  std::uint64_t bestErr = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t b = 0; b < behaviors.size(); ++b) {
    const auto err = indexed.errorSum(behaviors[b].labels);
    if (err < bestErr) {
      bestErr = err;
      best = b;
    }
  }
  return {behaviors[best].witness, bestErr, behaviors.size()};
}

inline Hypothesis drerm(const HypothesisClass& cls, const SampleSet& s) { return drermDetailed(cls, s).hypothesis; }

struct LearnResult {
  Hypothesis hypothesis;
  double trainLoss = 0.0;       // DR_S on the drawn sample
  double populationLoss = 0.0;  // exact DR_D against the true sets
};

/// drawTrainingSet, then drerm, then exact DR_D with respect to U(x).
inline LearnResult learn(const TaskInstance& task, const LearnConfig& cfg) {
  Rng rng(cfg.seed);
  const auto s = drawTrainingSet(task, cfg, rng);
  auto fit = drermDetailed(cfg.cls, s);
  const double train = static_cast<double>(fit.errorSum) / (static_cast<double>(s.n()) * static_cast<double>(s.m));
  const double pop = populationDrLossExact(fit.hypothesis, task, FamilyView::trueSet);
  return {std::move(fit.hypothesis), train, pop};
}

/// Every behavior of a class on the full finite universe of a task (all
/// clean points and all support points of both family views), with its
/// exact DR_D. Since every possible sample lies inside the universe, these
/// behaviors stand for all of H when scoring samples: DR_S and DR_D of any
/// h in H equal those of the behavior it induces.
class BehaviorOracle {
 public:
  BehaviorOracle(const TaskInstance& task, const HypothesisClass& cls) {
    if (!task.allFinite(FamilyView::trueSet)) throw Error("BehaviorOracle: task must be finite");
    for (const auto& e : task.examples()) {
      universe_.push_back(e.example.x);
      auto addSupport = [&](const std::vector<PerturbationDistribution>& members) {
        for (const auto& d : members) {
          const auto* u = std::get_if<FiniteDistribution>(&d);
          if (!u) throw Error("BehaviorOracle: task must be finite");
          universe_.insert(universe_.end(), u->support().begin(), u->support().end());
        }
      };
      addSupport(e.family.trueSet);
      if (e.family.repSet) addSupport(*e.family.repSet);
    }
    std::sort(universe_.begin(), universe_.end());
    universe_.erase(std::unique(universe_.begin(), universe_.end()), universe_.end());
    behaviors_ = enumerateBehaviors(cls, universe_);
    trueLoss_.reserve(behaviors_.size());
    exampleLoss_.reserve(behaviors_.size());
    for (const auto& b : behaviors_) {
      std::vector<double> per;
      per.reserve(task.size());
      for (const auto& e : task.examples()) {
        double worst = 0.0;
        for (const auto& d : e.family.trueSet) {
          worst = std::max(worst, memberLoss(b.witness, std::get<FiniteDistribution>(d), e.example.y));
        }
        per.push_back(worst);
      }
      exampleLoss_.push_back(std::move(per));
      trueLoss_.push_back(populationDrLossExact(b.witness, task, FamilyView::trueSet));
    }
  }

  const std::vector<Point>& universe() const { return universe_; }
  const std::vector<Behavior>& behaviors() const { return behaviors_; }
  std::size_t size() const { return behaviors_.size(); }

  /// Exact DR_D of behavior b against the true sets.
  double trueLoss(std::size_t b) const { return trueLoss_[b]; }

  /// max over u in U(x_e) of the exact loss of behavior b on example e.
  double exampleLoss(std::size_t b, std::size_t e) const { return exampleLoss_[b][e]; }

  double minTrueLoss() const { return *std::min_element(trueLoss_.begin(), trueLoss_.end()); }

  IndexedSample index(const SampleSet& s) const { return IndexedSample(s, universe_); }

  double empiricalLoss(std::size_t b, const IndexedSample& s) const { return s.loss(behaviors_[b].labels); }

  /// Index of the behavior h induces on the universe.
  std::size_t behaviorOf(const Hypothesis& h) const {
    std::vector<Label> labels(universe_.size());
    for (std::size_t i = 0; i < universe_.size(); ++i) labels[i] = h(universe_[i]);
    for (std::size_t b = 0; b < behaviors_.size(); ++b) {
      if (behaviors_[b].labels == labels) return b;
    }
    throw Error("BehaviorOracle: hypothesis induces a behavior outside the class");
  }

 private:
  std::vector<Point> universe_;
  std::vector<Behavior> behaviors_;
  std::vector<double> trueLoss_;
  std::vector<std::vector<double>> exampleLoss_;
};

}  // namespace darl
