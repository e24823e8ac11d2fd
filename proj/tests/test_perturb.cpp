#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "darl/perturb.hpp"
#include "oracles.hpp"

using namespace darl;

namespace {

FiniteDistribution on3(double a, double b, double c) {
  std::vector<Point> s;
  std::vector<double> p;
  for (auto [x, w] : {std::pair{0.0, a}, {1.0, b}, {2.0, c}}) {
    if (w > 0) {
      s.emplace_back(x);
      p.push_back(w);
    }
  }
  return {s, p};
}

FiniteDistribution randomOn(Rng& rng, std::size_t n) {
  std::vector<Point> s;
  std::vector<double> p;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < 0.7) {
      s.emplace_back(static_cast<double>(i));
      p.push_back(rng.uniform() + 0.01);
      total += p.back();
    }
  }
  if (s.empty()) return FiniteDistribution::pointMass(0.0);
  for (auto& w : p) w /= total;
  return {s, p};
}

}  // namespace

TEST(Sample, PointMassRepeatsCenter) {
  Rng rng(1);
  const auto pts = sample(FiniteDistribution::pointMass(4.0), 5, rng);
  ASSERT_EQ(pts.size(), 5u);
  for (const auto& p : pts) EXPECT_EQ(p, Point(4.0));
}

TEST(Sample, UniformPairFrequency) {
  Rng rng(2);
  const auto pts = sample(FiniteDistribution::uniform({0.0, 1.0}), 1000000, rng);
  const auto ones = std::count(pts.begin(), pts.end(), Point(1.0));
  const double f = static_cast<double>(ones) / 1e6;
  // Hoeffding window at failure probability 1e-6: sqrt(ln(2e6) / (2n)).
  const double tol = std::sqrt(std::log(2e6) / 2e6);
  EXPECT_NEAR(f, 0.5, tol);
}

TEST(Sample, GaussianMean) {
  Rng rng(3);
  const auto pts = sample(GaussianDistribution(0.0, 1.0), 1000000, rng);
  double mean = 0;
  for (const auto& p : pts) mean += p[0];
  mean /= 1e6;
  EXPECT_LE(std::abs(mean), 0.004);
}

TEST(Sample, DeterministicPerSeed) {
  Rng a(9), b(9);
  const auto d = FiniteDistribution::uniform({0.0, 1.0, 2.0});
  EXPECT_EQ(sample(d, 50, a), sample(d, 50, b));
}

TEST(Sample, RejectsZeroCount) {
  Rng rng(1);
  EXPECT_THROW(sample(FiniteDistribution::pointMass(0.0), 0, rng), Error);
}

TEST(Sample, DrawCountsMatchMarginals) {
  Rng rng(4);
  const FiniteDistribution d({0.0, 1.0, 2.0}, {0.2, 0.5, 0.3});
  const auto c = d.drawCounts(1000000, rng);
  EXPECT_EQ(c[0] + c[1] + c[2], 1000000u);
  EXPECT_NEAR(c[0] / 1e6, 0.2, 0.002);
  EXPECT_NEAR(c[1] / 1e6, 0.5, 0.002);
  EXPECT_NEAR(c[2] / 1e6, 0.3, 0.002);
}

TEST(FiniteDistribution, Validation) {
  EXPECT_THROW(FiniteDistribution({}, {}), Error);
  EXPECT_THROW(FiniteDistribution({0.0, 1.0}, {1.0}), Error);
  EXPECT_THROW(FiniteDistribution({0.0, 1.0}, {1.2, -0.2}), Error);
  EXPECT_THROW(FiniteDistribution({0.0, 0.0}, {0.5, 0.5}), Error);
  EXPECT_THROW(FiniteDistribution({0.0, 1.0}, {0.5, 0.6}), Error);
  const FiniteDistribution near({0.0, 1.0}, {0.5, 0.5 + 5e-10});
  EXPECT_NEAR(near.probs()[0] + near.probs()[1], 1.0, 1e-12);
}

TEST(Gaussian, RejectsNonPositiveSigma) {
  EXPECT_THROW(GaussianDistribution(0.0, 0.0), Error);
}

TEST(Family, RepSetCappedByK) {
  DistributionFamily f{{FiniteDistribution::pointMass(0.0)},
                       std::vector<PerturbationDistribution>{FiniteDistribution::pointMass(0.0),
                                                             FiniteDistribution::pointMass(1.0)},
                       1};
  EXPECT_THROW(f.validate(false), Error);
  f.k = 2;
  EXPECT_NO_THROW(f.validate(false));
}

TEST(Tv, Examples) {
  const auto a = on3(0.5, 0.5, 0);
  EXPECT_DOUBLE_EQ(tvDistance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(tvDistance(a, on3(0, 0.5, 0.5)), 0.5);
  EXPECT_DOUBLE_EQ(tvDistance(FiniteDistribution::pointMass(0.0), FiniteDistribution::pointMass(1.0)), 1.0);
}

TEST(Tv, ZeroMassAtomsCountOnce) {
  const FiniteDistribution a({0.0, 1.0}, {1.0, 0.0});
  const FiniteDistribution b({1.0}, {1.0});
  EXPECT_DOUBLE_EQ(tvDistance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(tvDistance(b, a), 1.0);
}

TEST(Tv, MetricOnRandomTriples) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = randomOn(rng, 5), b = randomOn(rng, 5), c = randomOn(rng, 5);
    const double ab = tvDistance(a, b), ba = tvDistance(b, a);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-12);
    EXPECT_NEAR(ab, ba, 1e-15);
    EXPECT_LE(tvDistance(a, c), ab + tvDistance(b, c) + 1e-12);
    EXPECT_NEAR(tvDistance(a, a), 0.0, 1e-15);
  }
}

TEST(GaussianShiftTv, ClosedFormProperties) {
  EXPECT_EQ(gaussianShiftTv(0.0, 3.0), 0.0);
  double prev = 0;
  for (double d = 0.1; d < 20; d += 0.1) {
    const double v = gaussianShiftTv(d, 1.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_NEAR(gaussianShiftTv(40.0, 1.0), 1.0, 1e-12);
  for (double c : {0.5, 2.0, 7.0}) EXPECT_NEAR(gaussianShiftTv(c * 0.8, c * 1.3), gaussianShiftTv(0.8, 1.3), 1e-14);
  EXPECT_THROW(gaussianShiftTv(-1.0, 1.0), Error);
  EXPECT_THROW(gaussianShiftTv(1.0, 0.0), Error);
}

TEST(GaussianShiftTv, MatchesDensityRatioMonteCarlo) {
  for (double delta : {0.5, 2.0}) {
    const double mc = oracle::shiftedGaussianTvMc(delta, 1.0, 1000000, 11);
    EXPECT_NEAR(gaussianShiftTv(delta, 1.0), mc, 0.005) << "delta=" << delta;
  }
  EXPECT_NEAR(gaussianShiftTv(2.0, 1.0), 0.6827, 5e-5);
  EXPECT_NEAR(gaussianShiftTv(0.5, 1.0), 0.1974, 5e-5);
}

TEST(Cover, Examples) {
  const auto u = FiniteDistribution::uniform({0.0, 1.0});
  auto one = buildRepresentativeCover({u}, 1);
  EXPECT_EQ(one.reps.size(), 1u);
  EXPECT_EQ(one.radius, 0.0);
  EXPECT_EQ(buildRepresentativeCover({u, u}, 1).radius, 0.0);

  const FiniteDistribution e0({0.0, 1.0}, {1.0, 0.0}), e1({0.0, 1.0}, {0.0, 1.0});
  const auto c = buildRepresentativeCover({e0, e1, u}, 2);
  EXPECT_LE(c.reps.size(), 2u);
  EXPECT_DOUBLE_EQ(c.radius, 0.5);
}

TEST(Cover, RadiusIsAchievedMaxMin) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    std::vector<FiniteDistribution> fam;
    const std::size_t size = 1 + rng.index(6);
    for (std::size_t j = 0; j < size; ++j) fam.push_back(randomOn(rng, 4));
    const std::size_t k = 1 + rng.index(4);
    const auto c = buildRepresentativeCover(fam, k);
    EXPECT_LE(c.reps.size(), k);
    double radius = 0;
    for (const auto& u : fam) {
      double best = INFINITY;
      for (const auto& r : c.reps) best = std::min(best, tvDistance(u, r));
      radius = std::max(radius, best);
    }
    EXPECT_DOUBLE_EQ(c.radius, radius);
    // Farthest-point greedy is within a factor 2 of the best k-subset.
    double opt = INFINITY;
    for (std::size_t mask = 1; mask < (std::size_t{1} << size); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) > k) continue;
      double rad = 0;
      for (const auto& u : fam) {
        double best = INFINITY;
        for (std::size_t j = 0; j < size; ++j) {
          if ((mask >> j) & 1) best = std::min(best, tvDistance(u, fam[j]));
        }
        rad = std::max(rad, best);
      }
      opt = std::min(opt, rad);
    }
    EXPECT_LE(c.radius, 2 * opt + 1e-12);
    if (k >= size) EXPECT_EQ(c.radius, 0.0);
  }
}

TEST(PointwiseCover, Examples) {
  const FiniteDistribution u({0.0, 1.0}, {0.5, 0.5});
  EXPECT_TRUE(verifyPointwiseCover(u, {u}));
  EXPECT_FALSE(verifyPointwiseCover(u, {FiniteDistribution::pointMass(0.0)}));
  EXPECT_EQ(pointwiseCoverViolation(u, {FiniteDistribution::pointMass(0.0)}), Point(1.0));
  const FiniteDistribution v({0.0, 1.0}, {0.4, 0.6});
  const FiniteDistribution r1({0.0, 1.0, 2.0}, {0.5, 0.2, 0.3}), r2({0.0, 1.0, 2.0}, {0.1, 0.7, 0.2});
  EXPECT_TRUE(verifyPointwiseCover(v, {r1, r2}));
}

TEST(PointwiseCover, SelfCoverAlwaysHolds) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto u = randomOn(rng, 6);
    EXPECT_TRUE(verifyPointwiseCover(u, {u}));
    EXPECT_TRUE(verifyPointwiseCover(u, {randomOn(rng, 6), u}));
  }
}
