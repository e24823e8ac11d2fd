#pragma once

// Built-in tasks and the task file format.
//
// Task file (JSON):
//   {
//     "distributions": {"d0": [[0, 1.0]], "u01": [[0, 0.5], [1, 0.5]],
//                       "g": {"gaussian": {"center": 0, "sigma": 1}}},
//     "examples": [
//       {"x": 0, "y": -1, "prob": 0.5, "k": 2,
//        "trueSet": ["d0", "u01"], "repSet": ["u01"]}
//     ]
//   }
// Family members are distribution names or inline distributions.

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "darl/derand.hpp"
#include "darl/json_io.hpp"
#include "darl/loss.hpp"
#include "darl/xprun/report.hpp"

namespace darl::xprun {

namespace tasks {

inline FiniteDistribution at(std::vector<std::pair<double, double>> atoms) {
  std::vector<Point> support;
  std::vector<double> probs;
  for (auto [x, p] : atoms) {
    support.emplace_back(x);
    probs.push_back(p);
  }
  return {std::move(support), std::move(probs)};
}

inline DistributionFamily family(std::vector<PerturbationDistribution> trueSet, std::size_t k,
                                 std::optional<std::vector<PerturbationDistribution>> repSet = std::nullopt) {
  return {std::move(trueSet), std::move(repSet), k};
}

/// D uniform on {(0,-1), (3,+1)}; U(0) = {delta_0, Unif{0,1}}, U(3) = {delta_3, Unif{2,3}}.
inline TaskInstance t1() {
  auto f0 = family({FiniteDistribution::pointMass(0.0), FiniteDistribution::uniform({0.0, 1.0})}, 2);
  auto f3 = family({FiniteDistribution::pointMass(3.0), FiniteDistribution::uniform({2.0, 3.0})}, 2);
  return TaskInstance({{{0.0, kNeg}, 0.5, f0}, {{3.0, kPos}, 0.5, f3}});
}

/// t1 with each label flipped with probability `noise`.
inline TaskInstance t1Noisy(double noise = 0.1) {
  auto f0 = family({FiniteDistribution::pointMass(0.0), FiniteDistribution::uniform({0.0, 1.0})}, 2);
  auto f3 = family({FiniteDistribution::pointMass(3.0), FiniteDistribution::uniform({2.0, 3.0})}, 2);
  const double clean = 0.5 * (1.0 - noise), flipped = 0.5 * noise;
  return TaskInstance({{{0.0, kNeg}, clean, f0},
                       {{0.0, kPos}, flipped, f0},
                       {{3.0, kPos}, clean, f3},
                       {{3.0, kNeg}, flipped, f3}});
}

/// Unbounded true sets with a k = 2 representative set at TV radius 0.1:
/// each example gains a member that moves 0.1 mass across the decision
/// region, which every threshold consistent with R(x) then misclassifies.
inline TaskInstance model1() {
  const auto d0 = FiniteDistribution::pointMass(0.0);
  const auto u0 = FiniteDistribution::uniform({0.0, 1.0});
  const auto d5 = FiniteDistribution::pointMass(5.0);
  const auto u5 = FiniteDistribution::uniform({4.0, 5.0});
  auto f0 = family({d0, u0, at({{0.0, 0.45}, {1.0, 0.45}, {4.5, 0.1}})}, 2,
                   std::vector<PerturbationDistribution>{d0, u0});
  auto f5 = family({d5, u5, at({{0.5, 0.1}, {4.0, 0.45}, {5.0, 0.45}})}, 2,
                   std::vector<PerturbationDistribution>{d5, u5});
  return TaskInstance({{{0.0, kNeg}, 0.5, f0}, {{5.0, kPos}, 0.5, f5}});
}

/// Model II: every true member is pointwise dominated by the max of the
/// k = 2 representatives; the extra member is their renormalized max.
inline TaskInstance model2() {
  const auto r0a = FiniteDistribution::uniform({0.0, 1.0});
  const auto r0b = FiniteDistribution::uniform({0.0, 1.5});
  const auto r5a = FiniteDistribution::uniform({4.0, 5.0});
  const auto r5b = FiniteDistribution::uniform({3.5, 5.0});
  auto f0 = family({r0a, r0b, FiniteDistribution::uniform({0.0, 1.0, 1.5})}, 2,
                   std::vector<PerturbationDistribution>{r0a, r0b});
  auto f5 = family({r5a, r5b, FiniteDistribution::uniform({3.5, 4.0, 5.0})}, 2,
                   std::vector<PerturbationDistribution>{r5a, r5b});
  return TaskInstance({{{0.0, kNeg}, 0.5, f0}, {{5.0, kPos}, 0.5, f5}});
}

/// Thresholds have one behavior with DR_D = 0.1, just above eps = 0.09, that
/// survives training with zero loss whenever no draw lands on 1.
inline TaskInstance nearThreshold() {
  auto f0 = family({at({{0.0, 0.8}, {1.0, 0.2}})}, 1);
  auto f3 = family({FiniteDistribution::pointMass(3.0)}, 1);
  return TaskInstance({{{0.0, kNeg}, 0.5, f0}, {{3.0, kPos}, 0.5, f3}});
}

/// Four 1-d points, negatives left of zero; R(x) = U(x) = {N(x, sigma^2)}.
inline TaskInstance smoothing1d(double sigma) {
  std::vector<TaskExample> ex;
  for (double x : {-2.0, -1.0, 1.0, 2.0}) {
    std::vector<PerturbationDistribution> g{GaussianDistribution(x, sigma)};
    ex.push_back({{x, x < 0 ? kNeg : kPos}, 0.25, family(g, 1, g)});
  }
  return TaskInstance(std::move(ex));
}

inline PerturbationDistribution distributionFromSpec(const Json& j, const std::map<std::string, PerturbationDistribution>& named) {
  if (j.is_string()) {
    auto it = named.find(j.get<std::string>());
    if (it == named.end()) throw ConfigError("task: unknown distribution '" + j.get<std::string>() + "'");
    return it->second;
  }
  if (j.is_object() && j.contains("gaussian")) {
    const auto& g = j.at("gaussian");
    return GaussianDistribution(pointFromJson(g.at("center")), g.at("sigma").get<double>());
  }
  return distributionFromJson(j);
}

inline TaskInstance taskFromJson(const Json& j) {
  try {
    std::map<std::string, PerturbationDistribution> named;
    if (j.contains("distributions")) {
      for (const auto& [name, spec] : j.at("distributions").items()) named.emplace(name, distributionFromSpec(spec, named));
    }
    std::vector<TaskExample> ex;
    for (const auto& e : j.at("examples")) {
      DistributionFamily fam;
      for (const auto& d : e.at("trueSet")) fam.trueSet.push_back(distributionFromSpec(d, named));
      if (e.contains("repSet")) {
        std::vector<PerturbationDistribution> reps;
        for (const auto& d : e.at("repSet")) reps.push_back(distributionFromSpec(d, named));
        fam.repSet = std::move(reps);
      }
      fam.k = e.contains("k") ? e.at("k").get<std::size_t>()
                              : std::max(fam.trueSet.size(), fam.repSet ? fam.repSet->size() : std::size_t{0});
      ex.push_back({{pointFromJson(e.at("x")), e.at("y").get<Label>()}, e.at("prob").get<double>(), std::move(fam)});
    }
    return TaskInstance(std::move(ex));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("task: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("task: ") + e.what());
  }
}

inline TaskInstance loadTaskFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read task file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("task file '" + path + "': " + e.what());
  }
  return taskFromJson(j);
}

/// Resolves a task spec: a built-in name or "file:<path>".
inline TaskInstance resolve(const std::string& spec, double sigma = 1.0) {
  if (spec.rfind("file:", 0) == 0) return loadTaskFile(spec.substr(5));
  if (spec == "t1") return t1();
  if (spec == "t1-noisy") return t1Noisy(0.1);
  if (spec == "model1") return model1();
  if (spec == "model2") return model2();
  if (spec == "near-threshold") return nearThreshold();
  if (spec == "smoothing-1d") return smoothing1d(sigma);
  throw ConfigError("unknown task '" + spec + "'");
}

/// Hypothesis class named in a config; finite classes span the task's universe.
inline HypothesisClass resolveClass(const std::string& name, const TaskInstance& task) {
  if (name == "threshold-1d") return HypothesisClass::thresholds();
  if (name == "interval-1d") return HypothesisClass::intervals();
  if (name.rfind("axis-rect-", 0) == 0) {
    const auto d = name.substr(10);
    return HypothesisClass::axisRects(d == "d" ? task[0].example.x.size() : std::stoul(d));
  }
  std::vector<Point> domain;
  for (const auto& e : task.examples()) {
    domain.push_back(e.example.x);
    for (const auto& d : e.family.trueSet) {
      if (const auto* u = std::get_if<FiniteDistribution>(&d)) domain.insert(domain.end(), u->support().begin(), u->support().end());
    }
    if (e.family.repSet) {
      for (const auto& d : *e.family.repSet) {
        if (const auto* u = std::get_if<FiniteDistribution>(&d)) domain.insert(domain.end(), u->support().begin(), u->support().end());
      }
    }
  }
  std::sort(domain.begin(), domain.end());
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
  if (name == "finite-table") return HypothesisClass::allLabelings(domain);
  if (name == "constant-neg") return HypothesisClass::constant(domain, kNeg);
  if (name == "constant-pos") return HypothesisClass::constant(domain, kPos);
  if (name.rfind("fixed-threshold:", 0) == 0) {
    // |H| = 1: the single threshold, tabulated on the universe.
    const Hypothesis h = Threshold{std::stod(name.substr(16))};
    std::vector<Label> labels;
    for (const auto& x : domain) labels.push_back(h(x));
    return HypothesisClass::finiteTables(domain, {labels});
  }
  throw ConfigError("unknown hypothesis class '" + name + "'");
}

/// Random finite task on the integer domain {0, ..., d-1}, 2 <= d <= maxPoints:
/// up to three clean examples with random labels and masses, each with
/// 1..maxK members on random supports.
inline TaskInstance randomFiniteTask(Rng& rng, std::size_t maxPoints = 6, std::size_t maxK = 3) {
  const std::size_t d = 2 + rng.index(maxPoints - 1);
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t examples = 1 + rng.index(std::min<std::size_t>(3, d));
  std::vector<double> weights;
  for (std::size_t e = 0; e < examples; ++e) weights.push_back(0.05 + rng.uniform());
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<TaskExample> ex;
  for (std::size_t e = 0; e < examples; ++e) {
    const std::size_t k = 1 + rng.index(maxK);
    std::vector<PerturbationDistribution> members;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<Point> support;
      std::vector<double> probs;
      for (std::size_t z = 0; z < d; ++z) {
        if (rng.uniform() < 0.6) {
          support.emplace_back(static_cast<double>(z));
          probs.push_back(0.05 + rng.uniform());
        }
      }
      if (support.empty()) {
        support.emplace_back(static_cast<double>(rng.index(d)));
        probs.push_back(1.0);
      }
      const double psum = std::accumulate(probs.begin(), probs.end(), 0.0);
      for (auto& p : probs) p /= psum;
      members.emplace_back(FiniteDistribution(std::move(support), std::move(probs)));
    }
    const Label y = rng.uniform() < 0.5 ? kNeg : kPos;
    ex.push_back({{static_cast<double>(order[e]), y}, weights[e] / wsum, family(std::move(members), k)});
  }
  return TaskInstance(std::move(ex));
}

/// Every integer point a randomFiniteTask can use.
inline std::vector<Point> integerDomain(std::size_t size) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < size; ++i) pts.emplace_back(static_cast<double>(i));
  return pts;
}

/// Synthetic derandomization task: `examples` clean points with alternating
/// labels, each with |A(x)| = aSize perturbations. Per-draw error of the base
/// classifier is level(e) at every perturbation of example e, or with `ramp`
/// level(e) * (j + 1) / aSize at the j-th one. Either way
/// epsilon(x, y) = level(e) exactly; levels are assigned round-robin.
struct SyntheticDerand {
  AdversarialTask task;
  std::vector<double> perExampleEps;  // epsilon(x, y), exact by construction
  std::shared_ptr<const std::map<Point, std::pair<Label, double>>> truth;  // x' -> (y, error prob)
};

inline SyntheticDerand syntheticDerand(std::size_t examples, std::size_t aSize, const std::vector<double>& levels,
                                       bool ramp = false) {
  if (examples == 0 || aSize == 0 || levels.empty()) throw ConfigError("synthetic task: sizes must be positive");
  std::vector<AdversarialExample> ex;
  std::vector<double> eps;
  auto truth = std::make_shared<std::map<Point, std::pair<Label, double>>>();
  for (std::size_t e = 0; e < examples; ++e) {
    const Label y = e % 2 ? kPos : kNeg;
    const double level = levels[e % levels.size()];
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("synthetic task: error levels must lie in [0, 1]");
    AdversarialExample a{{static_cast<double>(e), y}, 1.0 / static_cast<double>(examples), {}};
    for (std::size_t j = 0; j < aSize; ++j) {
      Point xp(static_cast<double>(e) + 0.5 * static_cast<double>(j) / static_cast<double>(aSize));
      a.aSet.push_back(xp);
      (*truth)[xp] = {y, ramp ? level * static_cast<double>(j + 1) / static_cast<double>(aSize) : level};
    }
    eps.push_back(level);
    ex.push_back(std::move(a));
  }
  return {AdversarialTask(std::move(ex)), std::move(eps), std::move(truth)};
}

/// h(x', R) errs independently per (x', R) with the configured probability.
inline RandomizedClassifier syntheticClassifier(std::shared_ptr<const std::map<Point, std::pair<Label, double>>> truth) {
  return {[truth](const Point& x, Draw r) {
            const auto& [y, p] = truth->at(x);
            const auto key = std::bit_cast<std::uint64_t>(x[0]);
            return hashUniform(r, key) < p ? -y : y;
          },
          RandomnessDistribution{}};
}

/// rho(x', R) lands uniformly inside [1 - beta, 1 + alpha] * robreg with
/// probability inBand, and at (1 + 2 alpha) * robreg otherwise;
/// robreg(x') = 1 + 0.1 * (j + 1) on the j-th perturbation.
inline RandomizedCertifier syntheticCertifier(const AdversarialTask& task, double inBand, double alpha, double beta) {
  auto robreg = std::make_shared<std::map<Point, double>>();
  for (const auto& e : task.examples()) {
    for (std::size_t j = 0; j < e.aSet.size(); ++j) (*robreg)[e.aSet[j]] = 1.0 + 0.1 * static_cast<double>(j + 1);
  }
  RandomizedCertifier c;
  c.robreg = [robreg](const Point& x) { return robreg->at(x); };
  c.evaluate = [robreg, inBand, alpha, beta](const Point& x, Draw r) {
    const double rr = robreg->at(x);
    const auto key = std::bit_cast<std::uint64_t>(x[0]);
    if (hashUniform(r, key) < inBand) {
      const double u = hashUniform(r, key ^ 0x5bd1e995ULL);
      return rr * ((1.0 - beta) + u * (alpha + beta));
    }
    return rr * (1.0 + 2.0 * alpha);
  };
  return c;
}

}  // namespace tasks

}  // namespace darl::xprun
