#pragma once

// Distributional adversarial loss: empirical (over a drawn sample set),
// exact population (finite tasks), and Monte Carlo population estimates.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <vector>

#include "darl/hypo.hpp"
#include "darl/perturb.hpp"
#include "darl/randomized.hpp"
#include "darl/stats.hpp"

namespace darl {

template <class F>
concept BinaryPredictor = std::regular_invocable<const F&, const Point&> &&
                          std::convertible_to<std::invoke_result_t<const F&, const Point&>, Label>;

struct TaskExample {
  LabeledExample example;
  double prob = 0.0;
  DistributionFamily family;
};

/// The data distribution D over labeled examples with a family per example.
class TaskInstance {
 public:
  explicit TaskInstance(std::vector<TaskExample> examples) : examples_(std::move(examples)) {
    if (examples_.empty()) throw Error("TaskInstance: empty data distribution");
    double total = 0.0;
    for (const auto& e : examples_) {
      if (!(e.prob >= 0.0)) throw Error("TaskInstance: negative probability");
      if (e.example.y != kNeg && e.example.y != kPos) throw Error("TaskInstance: labels must be -1 or +1");
      e.family.validate(false);
      total += e.prob;
    }
    if (std::abs(total - 1.0) > kRenormalizeTolerance) throw Error("TaskInstance: probabilities must sum to 1");
    cumulative_.reserve(examples_.size());
    double acc = 0.0;
    for (auto& e : examples_) {
      e.prob /= total;
      acc += e.prob;
      cumulative_.push_back(acc);
    }
  }

  const std::vector<TaskExample>& examples() const { return examples_; }
  std::size_t size() const { return examples_.size(); }
  const TaskExample& operator[](std::size_t i) const { return examples_[i]; }

  std::size_t drawIndex(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto i = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
    i = std::min(i, examples_.size() - 1);
    while (examples_[i].prob == 0.0 && i > 0) --i;
    return i;
  }

  bool allFinite(FamilyView view) const {
    for (const auto& e : examples_) {
      for (const auto& d : e.family.view(view)) {
        if (!isFinite(d)) return false;
      }
    }
    return true;
  }

  bool hasRepSets() const {
    return std::all_of(examples_.begin(), examples_.end(), [](const auto& e) { return e.family.repSet.has_value(); });
  }

  /// max over examples of the number of family members in the view.
  std::size_t maxFamilySize(FamilyView view) const {
    std::size_t k = 0;
    for (const auto& e : examples_) k = std::max(k, e.family.view(view).size());
    return k;
  }

 private:
  std::vector<TaskExample> examples_;
  std::vector<double> cumulative_;
};

/// S = S_c plus S_p: n clean examples, and m draws per (clean example, member).
struct SampleSet {
  std::size_t m = 0;
  std::vector<std::size_t> source;  // task example index per clean draw
  std::vector<LabeledExample> clean;
  std::vector<std::vector<std::vector<Point>>> perturbed;  // [clean][member][draw]

  std::size_t n() const { return clean.size(); }

  std::size_t totalPoints() const {
    std::size_t total = clean.size();
    for (const auto& members : perturbed) {
      for (const auto& draws : members) total += draws.size();
    }
    return total;
  }

  void validate() const {
    if (clean.empty()) throw Error("SampleSet: empty sample set");
    if (perturbed.size() != clean.size()) throw Error("SampleSet: perturbation table misaligned");
    for (const auto& members : perturbed) {
      if (members.empty()) throw Error("SampleSet: clean example without perturbations");
      for (const auto& draws : members) {
        if (draws.size() != m) throw Error("SampleSet: member with a draw count other than m");
      }
    }
  }
};

/// Mass u puts on points h misclassifies as other than y.
template <BinaryPredictor H>
double memberLoss(const H& h, const FiniteDistribution& u, Label y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (h(u.support()[i]) != y) loss += u.probs()[i];
  }
  return loss;
}

/// DR_S(h) = (1/n) sum_i max_j (1/m) sum_{z in S_p(i, j)} 1[h(z) != y_i].
template <BinaryPredictor H>
double empiricalDrLoss(const H& h, const SampleSet& s) {
  s.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    std::size_t worst = 0;
    for (const auto& draws : s.perturbed[i]) {
      std::size_t errs = 0;
      for (const auto& z : draws) errs += h(z) != s.clean[i].y;
      worst = std::max(worst, errs);
    }
    total += static_cast<double>(worst) / static_cast<double>(s.m);
  }
  return total / static_cast<double>(s.n());
}

/// DR_D(h) = E_{(x,y)~D} max_{u in view(x)} E_{z~u} 1[h(z) != y], computed
/// exactly. Every member of the view must have finite support.
template <BinaryPredictor H>
double populationDrLossExact(const H& h, const TaskInstance& task, FamilyView view = FamilyView::trueSet) {
  double total = 0.0;
  for (const auto& e : task.examples()) {
    double worst = 0.0;
    for (const auto& d : e.family.view(view)) {
      const auto* u = std::get_if<FiniteDistribution>(&d);
      if (!u) throw Error("populationDrLossExact: Gaussian family member needs Monte Carlo");
      worst = std::max(worst, memberLoss(h, *u, e.example.y));
    }
    total += e.prob * worst;
  }
  return std::clamp(total, 0.0, 1.0);
}

struct McEstimate {
  double mean = 0.0;
  double stdError = 0.0;
};

/// Monte Carlo DR_D: n clean draws from D, m draws per family member, drawn
/// once at construction and reused for every hypothesis evaluated. Finite
/// members are stored as multinomial histograms over their support; Gaussian
/// members as explicit points.
class McLossEstimator {
 public:
  McLossEstimator(const TaskInstance& task, FamilyView view, std::size_t n, std::size_t m, Rng& rng)
      : task_(&task), view_(view), m_(m) {
    if (n == 0 || m == 0) throw Error("McLossEstimator: n and m must be >= 1");
    copies_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Copy c;
      c.example = task.drawIndex(rng);
      for (const auto& d : task[c.example].family.view(view)) {
        MemberDraws md;
        if (const auto* u = std::get_if<FiniteDistribution>(&d)) {
          md.counts = u->drawCounts(m, rng);
        } else {
          md.points = sample(d, m, rng);
        }
        c.members.push_back(std::move(md));
      }
      copies_.push_back(std::move(c));
    }
  }

  template <BinaryPredictor H>
  McEstimate evaluate(const H& h) const {
    // Misclassification pattern over each finite support, computed once.
    std::vector<std::vector<std::vector<char>>> wrong(task_->size());
    for (std::size_t e = 0; e < task_->size(); ++e) {
      const auto& ex = (*task_)[e];
      for (const auto& d : ex.family.view(view_)) {
        std::vector<char> w;
        if (const auto* u = std::get_if<FiniteDistribution>(&d)) {
          w.resize(u->size());
          for (std::size_t s = 0; s < u->size(); ++s) w[s] = h(u->support()[s]) != ex.example.y;
        }
        wrong[e].push_back(std::move(w));
      }
    }
    stats::MeanAccumulator acc;
    for (const auto& c : copies_) {
      const Label y = (*task_)[c.example].example.y;
      std::uint64_t worst = 0;
      for (std::size_t j = 0; j < c.members.size(); ++j) {
        const auto& md = c.members[j];
        std::uint64_t errs = 0;
        if (md.points.empty()) {
          const auto& w = wrong[c.example][j];
          for (std::size_t s = 0; s < md.counts.size(); ++s) errs += w[s] ? md.counts[s] : 0;
        } else {
          for (const auto& z : md.points) errs += h(z) != y;
        }
        worst = std::max(worst, errs);
      }
      acc.add(static_cast<double>(worst) / static_cast<double>(m_));
    }
    return {acc.mean(), acc.stderror()};
  }

 private:
  struct MemberDraws {
    std::vector<std::uint64_t> counts;
    std::vector<Point> points;
  };
  struct Copy {
    std::size_t example = 0;
    std::vector<MemberDraws> members;
  };

  const TaskInstance* task_;
  FamilyView view_;
  std::size_t m_;
  std::vector<Copy> copies_;
};

/// One-shot Monte Carlo DR_D with a standard error from the per-example spread.
template <BinaryPredictor H>
McEstimate populationDrLossMc(const H& h, const TaskInstance& task, std::size_t n, std::size_t m, Rng& rng,
                              FamilyView view = FamilyView::trueSet) {
  return McLossEstimator(task, view, n, m, rng).evaluate(h);
}

/// max over x' in A(x) of E_R 1[h(x', R) != y]. With trials == 0 the
/// expectation is enumerated exactly (finite randomness only); otherwise it
/// is estimated from `trials` draws shared across all x'.
inline double adversarialPointLoss(const RandomizedClassifier& h, const Point& /*x*/, Label y,
                                   std::span<const Point> aSet, std::size_t trials, Rng& rng) {
  if (aSet.empty()) throw Error("adversarialPointLoss: empty perturbation set");
  std::vector<Draw> draws;
  std::vector<double> weights;
  if (trials == 0) {
    if (!h.randomness.isFinite()) throw Error("adversarialPointLoss: exact mode needs finite randomness");
    draws = h.randomness.finite().draws;
    weights = h.randomness.finite().probs;
  } else {
    draws.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) draws.push_back(h.randomness.sample(rng));
    weights.assign(trials, 1.0 / static_cast<double>(trials));
  }
  double worst = 0.0;
  for (const auto& xp : aSet) {
    double err = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
      if (h.evaluate(xp, draws[i]) != y) err += weights[i];
    }
    worst = std::max(worst, err);
  }
  return std::clamp(worst, 0.0, 1.0);
}

/// A sample set re-expressed as per-(clean, member) histograms over a sorted
/// universe of points, so that DR_S of any labeling of the universe costs
/// one pass over the histograms.
class IndexedSample {
 public:
  /// `universe` must be sorted, duplicate-free, and contain every sample point.
  IndexedSample(const SampleSet& s, const std::vector<Point>& universe) : n_(s.n()), m_(s.m) {
    s.validate();
    copies_.reserve(s.n());
    for (std::size_t i = 0; i < s.n(); ++i) {
      Copy c;
      c.y = s.clean[i].y;
      for (const auto& draws : s.perturbed[i]) {
        std::vector<std::uint32_t> idx;
        idx.reserve(draws.size());
        for (const auto& z : draws) {
          auto it = std::lower_bound(universe.begin(), universe.end(), z);
          if (it == universe.end() || !(*it == z)) throw Error("IndexedSample: sample point outside universe");
          idx.push_back(static_cast<std::uint32_t>(it - universe.begin()));
        }
        std::sort(idx.begin(), idx.end());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> hist;
        for (auto v : idx) {
          if (!hist.empty() && hist.back().first == v) ++hist.back().second;
          else hist.emplace_back(v, 1u);
        }
        c.members.push_back(std::move(hist));
      }
      copies_.push_back(std::move(c));
    }
  }

  /// sum_i max_j (misclassified draws), for a labeling aligned with the universe.
  std::uint64_t errorSum(std::span<const Label> labels) const {
    std::uint64_t total = 0;
    for (const auto& c : copies_) {
      std::uint64_t worst = 0;
      for (const auto& hist : c.members) {
        std::uint64_t errs = 0;
        for (auto [v, count] : hist) errs += labels[v] != c.y ? count : 0;
        worst = std::max(worst, errs);
      }
      total += worst;
    }
    return total;
  }

  double loss(std::span<const Label> labels) const {
    return static_cast<double>(errorSum(labels)) / (static_cast<double>(n_) * static_cast<double>(m_));
  }

 private:
  struct Copy {
    Label y = kPos;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> members;
  };
  std::size_t n_;
  std::size_t m_;
  std::vector<Copy> copies_;
};

}  // namespace darl
