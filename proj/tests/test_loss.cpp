#include <gtest/gtest.h>

#include <cmath>

#include "darl/learner.hpp"
#include "darl/loss.hpp"
#include "darl/xprun/tasks.hpp"

using namespace darl;
namespace tasks = darl::xprun::tasks;

namespace {

SampleSet handSample(std::vector<LabeledExample> clean, std::vector<std::vector<std::vector<Point>>> perturbed) {
  SampleSet s;
  s.m = perturbed.front().front().size();
  s.clean = std::move(clean);
  s.perturbed = std::move(perturbed);
  s.source.assign(s.clean.size(), 0);
  return s;
}

Hypothesis randomTable(Rng& rng, std::size_t size) {
  std::vector<Label> l(size);
  for (auto& v : l) v = rng.uniform() < 0.5 ? kNeg : kPos;
  return HypothesisClass::finiteTables(tasks::integerDomain(size), {l}).table(0);
}

}  // namespace

TEST(EmpiricalDrLoss, Examples) {
  // Perfect classifier.
  auto s = handSample({{0.0, kNeg}}, {{{0.0, 0.5, 1.0}}});
  EXPECT_EQ(empiricalDrLoss(Hypothesis(Threshold{2.0}), s), 0.0);
  // n = 1, one member, wrong on one of four draws.
  s = handSample({{0.0, kNeg}}, {{{0.0, 0.5, 1.0, 3.0}}});
  EXPECT_EQ(empiricalDrLoss(Hypothesis(Threshold{2.0}), s), 0.25);
  // n = 2, k = 2, member losses {(0, 0.5), (0.25, 0)}.
  s = handSample({{0.0, kNeg}, {3.0, kPos}},
                 {{{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 3.0, 3.0}}, {{3.0, 3.0, 3.0, 1.0}, {3.0, 3.0, 3.0, 3.0}}});
  EXPECT_DOUBLE_EQ(empiricalDrLoss(Hypothesis(Threshold{2.0}), s), 0.375);
}

TEST(EmpiricalDrLoss, RejectsMalformed) {
  SampleSet s;
  s.m = 1;
  EXPECT_THROW(empiricalDrLoss(Hypothesis(Threshold{0}), s), Error);
  auto bad = handSample({{0.0, kNeg}}, {{{0.0, 1.0}}});
  bad.m = 3;
  EXPECT_THROW(empiricalDrLoss(Hypothesis(Threshold{0}), bad), Error);
}

TEST(PopulationDrLossExact, T1Examples) {
  const auto t1 = tasks::t1();
  EXPECT_EQ(populationDrLossExact(Hypothesis(Threshold{1.5}), t1), 0.0);
  EXPECT_DOUBLE_EQ(populationDrLossExact(Hypothesis(Threshold{2.5}), t1), 0.25);
  // Labels flipped everywhere: -1 on 3 and +1 on 0 and 1.
  EXPECT_EQ(populationDrLossExact(Hypothesis(Interval{-1, 1}), t1), 1.0);
}

TEST(PopulationDrLossExact, RejectsGaussianMembers) {
  EXPECT_THROW(populationDrLossExact(Hypothesis(Threshold{0}), tasks::smoothing1d(1.0)), Error);
}

TEST(PopulationDrLossExact, RepSetView) {
  const auto m1 = tasks::model1();
  EXPECT_DOUBLE_EQ(populationDrLossExact(Hypothesis(Threshold{2.5}), m1, FamilyView::repSet), 0.0);
  EXPECT_DOUBLE_EQ(populationDrLossExact(Hypothesis(Threshold{2.5}), m1, FamilyView::trueSet), 0.1);
}

TEST(PopulationDrLossExact, PointMassFamiliesGiveZeroOneRisk) {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<TaskExample> ex;
    std::vector<double> w;
    for (int i = 0; i < 5; ++i) w.push_back(rng.uniform() + 0.1);
    const double total = w[0] + w[1] + w[2] + w[3] + w[4];
    for (int i = 0; i < 5; ++i) {
      ex.push_back({{static_cast<double>(i), rng.uniform() < 0.5 ? kNeg : kPos}, w[i] / total,
                    tasks::family({FiniteDistribution::pointMass(static_cast<double>(i))}, 1)});
    }
    const TaskInstance task(ex);
    const auto h = randomTable(rng, 5);
    double risk = 0;
    for (const auto& e : task.examples()) risk += e.prob * (h(e.example.x) != e.example.y);
    EXPECT_NEAR(populationDrLossExact(h, task), risk, 1e-12);
  }
}

TEST(PopulationDrLossExact, MonotoneInFamilyAndBounded) {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto task = tasks::randomFiniteTask(rng);
    const auto h = randomTable(rng, 6);
    const double base = populationDrLossExact(h, task);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    auto ex = task.examples();
    auto& fam = ex[rng.index(ex.size())].family;
    fam.trueSet.push_back(FiniteDistribution::uniform({0.0, 1.0}));
    fam.k += 1;
    EXPECT_GE(populationDrLossExact(h, TaskInstance(ex)), base - 1e-12);
  }
}

TEST(PopulationDrLossMc, PointMassesAreExact) {
  Rng rng(3);
  // One example: every copy has the same loss, so there is no spread.
  const TaskInstance one({{{0.0, kNeg}, 1.0, tasks::family({FiniteDistribution::pointMass(1.0)}, 1)}});
  for (double t : {0.5, 1.5}) {
    const auto est = populationDrLossMc(Hypothesis(Threshold{t}), one, 50, 7, rng);
    EXPECT_EQ(est.mean, populationDrLossExact(Hypothesis(Threshold{t}), one));
    EXPECT_EQ(est.stdError, 0.0);
  }
  std::vector<TaskExample> ex = {{{0.0, kNeg}, 0.3, tasks::family({FiniteDistribution::pointMass(1.0)}, 1)},
                                 {{2.0, kPos}, 0.7, tasks::family({FiniteDistribution::pointMass(2.0)}, 1)}};
  EXPECT_EQ(populationDrLossMc(Hypothesis(Threshold{1.5}), TaskInstance(ex), 10, 3, rng).mean, 0.0);
}

TEST(PopulationDrLossMc, T1ThresholdWithinTolerance) {
  Rng rng(4);
  const auto est = populationDrLossMc(Hypothesis(Threshold{2.5}), tasks::t1(), 10000, 1000, rng);
  EXPECT_NEAR(est.mean, 0.25, 0.01);
  EXPECT_GT(est.stdError, 0.0);
}

TEST(PopulationDrLossMc, SmallSigmaGaussianApproachesZero) {
  Rng rng(5);
  const auto est = populationDrLossMc(Hypothesis(Threshold{0.0}), tasks::smoothing1d(0.01), 2000, 50, rng);
  EXPECT_EQ(est.mean, 0.0);
  const auto wide = populationDrLossMc(Hypothesis(Threshold{0.0}), tasks::smoothing1d(1.0), 2000, 50, rng);
  EXPECT_GT(wide.mean, 0.0);
}

TEST(PopulationDrLossMc, ReusesOneSampleAcrossHypotheses) {
  Rng a(6), b(6);
  const auto task = tasks::t1();
  const McLossEstimator est(task, FamilyView::trueSet, 500, 20, a);
  EXPECT_EQ(est.evaluate(Hypothesis(Threshold{2.5})).mean,
            populationDrLossMc(Hypothesis(Threshold{2.5}), task, 500, 20, b).mean);
  const auto first = est.evaluate(Hypothesis(Threshold{0.5}));
  EXPECT_EQ(est.evaluate(Hypothesis(Threshold{0.5})).mean, first.mean);
}

TEST(AdversarialPointLoss, Examples) {
  Rng rng(7);
  const std::vector<Point> a = {0.0, 1.0};
  RandomizedClassifier correct{[](const Point&, Draw) { return kPos; },
                               RandomnessDistribution(FiniteRandomness{{0, 1}, {0.5, 0.5}})};
  EXPECT_EQ(adversarialPointLoss(correct, 0.0, kPos, a, 0, rng), 0.0);

  RandomizedClassifier coin{[](const Point& x, Draw r) { return x[0] == 1.0 && r == 1 ? kNeg : kPos; },
                            RandomnessDistribution(FiniteRandomness{{0, 1}, {0.5, 0.5}})};
  EXPECT_EQ(adversarialPointLoss(coin, 0.0, kPos, a, 0, rng), 0.5);

  // Wrong w.p. 0.2 at x' = 0 and 0.3 at x' = 1 over ten equally likely draws.
  FiniteRandomness ten;
  for (Draw d = 0; d < 10; ++d) {
    ten.draws.push_back(d);
    ten.probs.push_back(0.1);
  }
  RandomizedClassifier ramp{[](const Point& x, Draw r) { return r < (x[0] == 0.0 ? 2u : 3u) ? kNeg : kPos; },
                            RandomnessDistribution(ten)};
  EXPECT_NEAR(adversarialPointLoss(ramp, 0.0, kPos, a, 0, rng), 0.3, 1e-12);
  EXPECT_NEAR(adversarialPointLoss(ramp, 0.0, kPos, a, 200000, rng), 0.3, 0.01);
  EXPECT_THROW(adversarialPointLoss(ramp, 0.0, kPos, {}, 0, rng), Error);
}

TEST(IndexedSample, AgreesWithDirectLoss) {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const auto task = tasks::randomFiniteTask(rng);
    LearnConfig cfg;
    cfg.n = 1 + rng.index(8);
    cfg.m = 1 + rng.index(8);
    const auto s = drawTrainingSet(task, cfg, rng);
    const auto universe = tasks::integerDomain(6);
    const IndexedSample idx(s, universe);
    const auto h = randomTable(rng, 6);
    std::vector<Label> labels;
    for (const auto& x : universe) labels.push_back(h(x));
    EXPECT_NEAR(idx.loss(labels), empiricalDrLoss(h, s), 1e-12);
  }
}

TEST(EmpiricalDrLoss, ApproachesPopulationLoss) {
  const auto task = tasks::t1();
  const Hypothesis h = Hypothesis(Threshold{2.5});
  const double exact = populationDrLossExact(h, task);
  std::vector<double> gaps;
  for (std::size_t nm : {10, 100, 1000}) {
    double gap = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      LearnConfig cfg;
      cfg.n = nm;
      cfg.m = nm;
      gap += std::abs(empiricalDrLoss(h, drawTrainingSet(task, cfg, rng)) - exact);
    }
    gaps.push_back(gap / 20);
  }
  EXPECT_GT(gaps[0], gaps[1]);
  EXPECT_GT(gaps[1], gaps[2]);
  EXPECT_LT(gaps[2], 0.02);
}
