#pragma once

// Experiment suites. Each runner takes a validated config and a
// worker count and returns a report with one row per (grid point, trial).
// Trial t at grid point g draws from Rng(deriveSeed(masterSeed, g, t)), so
// results do not depend on the number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "darl/derand.hpp"
#include "darl/learner.hpp"
#include "darl/loss.hpp"
#include "darl/stats.hpp"
#include "darl/xprun/config.hpp"
#include "darl/xprun/report.hpp"
#include "darl/xprun/tasks.hpp"

namespace darl::xprun {

/// f(0), ..., f(count - 1) on `jobs` threads; results in index order.
template <class F>
auto parallelMap(std::size_t count, std::size_t jobs, F&& f) {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(count);
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

namespace detail {

inline Cell I(std::size_t v) { return static_cast<std::int64_t>(v); }
inline Cell B(bool v) { return static_cast<std::int64_t>(v ? 1 : 0); }

inline ExperimentReport newReport(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  ExperimentReport r;
  r.experiment = kindName(cfg.kind);
  r.config = cfg.toJson();
  r.columns = std::move(columns);
  return r;
}

inline Rng trialRng(const ExperimentConfig& cfg, std::size_t g, std::size_t t) {
  return Rng(deriveSeed(cfg.masterSeed, g, t));
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline void requireSampleSizes(const GridPoint& g, const std::string& who) {
  require(g.n >= 1 && g.m >= 1, who + ": every grid point needs n >= 1 and m >= 1");
  require(!std::isnan(g.eps), who + ": every grid point needs eps");
}

inline double deltaOr(const GridPoint& g, double fallback) { return std::isnan(g.delta) ? fallback : g.delta; }

/// Frequency hits/trials with its Wilson interval and an optional bound.
inline stats::Interval addFrequency(ExperimentReport& r, const std::string& name, std::size_t grid,
                                    std::uint64_t hits, std::uint64_t trials, std::optional<double> bound) {
  const auto w = stats::wilson(hits, trials);
  r.aggregates.push_back({name, static_cast<std::int64_t>(grid),
                          static_cast<double>(hits) / static_cast<double>(trials), w.lo, w.hi, bound});
  return w;
}

inline std::string num(double v) { return formatNumber(v); }

inline std::string gridLabel(std::size_t g) { return "[" + std::to_string(g) + "]"; }

/// Wilson-slack check of a violation frequency against delta.
inline void assertFrequency(ExperimentReport& r, const std::string& name, std::size_t g, std::uint64_t hits,
                            std::uint64_t trials, double delta) {
  const auto w = stats::wilson(hits, trials);
  r.assertThat(name + gridLabel(g), w.lo <= delta,
               "freq=" + num(static_cast<double>(hits) / static_cast<double>(trials)) + " wilson_lo=" + num(w.lo) +
                   " delta=" + num(delta));
}

inline double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// One DRERM run scored against every behavior on the task universe.
struct BehaviorTrial {
  double trainLoss = 0.0;
  double popLoss = 0.0;
  double maxGap = 0.0;     // max over behaviors of |DR_S - DR_D|
  bool zeroLossBad = false;  // some behavior with DR_S = 0 and DR_D >= eps
  std::size_t behaviors = 0;
  std::string hypothesis;
};

inline BehaviorTrial behaviorTrial(const TaskInstance& task, const HypothesisClass& cls, const BehaviorOracle& oracle,
                                   const GridPoint& g, FamilyView view, bool exactInner, Rng rng) {
  LearnConfig lc;
  lc.n = g.n;
  lc.m = g.m;
  lc.sampleFrom = view;
  lc.cls = cls;
  const auto s = drawTrainingSet(task, lc, rng);
  const auto fit = drermDetailed(cls, s);
  BehaviorTrial out;
  out.trainLoss = static_cast<double>(fit.errorSum) / (static_cast<double>(s.n()) * static_cast<double>(s.m));
  out.popLoss = populationDrLossExact(fit.hypothesis, task, FamilyView::trueSet);
  out.behaviors = fit.behaviors;
  out.hypothesis = hypothesisToJson(fit.hypothesis).dump();
  const auto idx = oracle.index(s);
  for (std::size_t b = 0; b < oracle.size(); ++b) {
    const auto err = idx.errorSum(oracle.behaviors()[b].labels);
    double emp = static_cast<double>(err) / (static_cast<double>(s.n()) * static_cast<double>(s.m));
    if (exactInner) {
      emp = 0.0;
      for (auto e : s.source) emp += oracle.exampleLoss(b, e);
      emp /= static_cast<double>(s.n());
    }
    const double pop = oracle.trueLoss(b);
    out.maxGap = std::max(out.maxGap, std::abs(emp - pop));
    if (err == 0 && pop >= g.eps) out.zeroLossBad = true;
  }
  return out;
}

inline const std::vector<std::string>& behaviorColumns() {
  static const std::vector<std::string> cols = {"grid", "trial", "n", "m", "eps", "delta", "train_loss", "pop_loss",
                                                "max_gap", "bound", "violation", "zero_loss_violation", "hypothesis"};
  return cols;
}

inline void pushBehaviorRow(ExperimentReport& r, std::size_t g, std::size_t t, const GridPoint& gp, double delta,
                            const BehaviorTrial& bt, double bound, bool violation) {
  r.rows.push_back({I(g), I(t), I(gp.n), I(gp.m), gp.eps, delta, bt.trainLoss, bt.popLoss, bt.maxGap, bound,
                    B(violation), B(bt.zeroLossBad), bt.hypothesis});
}

/// Diagnostic only: median max-gap should shrink along the grid.
inline void gapDiagnostic(ExperimentReport& r, const std::vector<double>& medians) {
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] <= medians[i - 1];
  r.aggregates.push_back({"median_gap_nonincreasing", -1, monotone ? 1.0 : 0.0, {}, {}, {}});
}

}  // namespace detail

inline ExperimentReport runRealizable(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto task = tasks::resolve(cfg.task);
  require(task.allFinite(FamilyView::trueSet), "realizable: task must have finite perturbation sets");
  const auto cls = tasks::resolveClass(cfg.cls, task);
  const BehaviorOracle oracle(task, cls);
  if (oracle.minTrueLoss() > 0.0) {
    throw ConfigError("realizable: task is not realizable by " + cfg.cls + " (smallest exact DR_D over all " +
                      std::to_string(oracle.size()) + " behaviors is " + num(oracle.minTrueLoss()) + ")");
  }
  auto r = newReport(cfg, behaviorColumns());
  std::vector<stats::Interval> freq;
  std::vector<std::uint64_t> hatHits, anyHits;
  std::vector<double> medians;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    requireSampleSizes(gp, "realizable");
    const double delta = deltaOr(gp, 0.05);
    const auto trials = parallelMap(cfg.trials, jobs, [&](std::size_t t) {
      return behaviorTrial(task, cls, oracle, gp, FamilyView::trueSet, false, trialRng(cfg, g, t));
    });
    std::uint64_t hat = 0, any = 0;
    std::vector<double> gaps;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto& bt = trials[t];
      const bool v = bt.trainLoss == 0.0 && bt.popLoss >= gp.eps;
      hat += v;
      any += bt.zeroLossBad;
      gaps.push_back(bt.maxGap);
      pushBehaviorRow(r, g, t, gp, delta, bt, gp.eps, v);
    }
    freq.push_back(addFrequency(r, "violation_freq", g, hat, cfg.trials, delta));
    hatHits.push_back(hat);
    anyHits.push_back(any);
    addFrequency(r, "zero_loss_violation_freq", g, any, cfg.trials, delta);
    medians.push_back(median(gaps));
    r.aggregates.push_back({"median_max_gap", static_cast<std::int64_t>(g), medians.back(), {}, {}, {}});
  }
  for (auto g : cfg.checkedPoints()) {
    const double delta = deltaOr(cfg.grid[g], 0.05);
    assertFrequency(r, "violation_freq_le_delta", g, hatHits[g], cfg.trials, delta);
    assertFrequency(r, "zero_loss_violation_freq_le_delta", g, anyHits[g], cfg.trials, delta);
  }
  for (std::size_t g = 1; g < freq.size(); ++g) {
    r.assertThat("violation_freq_nonincreasing" + gridLabel(g), freq[g].lo <= freq[g - 1].hi,
                 "wilson_lo[" + std::to_string(g) + "]=" + num(freq[g].lo) + " wilson_hi[" + std::to_string(g - 1) +
                     "]=" + num(freq[g - 1].hi));
  }
  gapDiagnostic(r, medians);
  return r;
}

inline ExperimentReport runAgnostic(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto task = tasks::resolve(cfg.task);
  require(task.allFinite(FamilyView::trueSet), "agnostic: task must have finite perturbation sets");
  const auto cls = tasks::resolveClass(cfg.cls, task);
  const BehaviorOracle oracle(task, cls);
  const bool exactInner = cfg.option<bool>("exact_inner", false);
  auto r = newReport(cfg, behaviorColumns());
  std::vector<std::uint64_t> hitsPerGrid;
  std::vector<double> medians;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    requireSampleSizes(gp, "agnostic");
    const double delta = deltaOr(gp, 0.05);
    const auto trials = parallelMap(cfg.trials, jobs, [&](std::size_t t) {
      return behaviorTrial(task, cls, oracle, gp, FamilyView::trueSet, exactInner, trialRng(cfg, g, t));
    });
    std::uint64_t hits = 0;
    std::vector<double> gaps;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const bool v = trials[t].maxGap > gp.eps;
      hits += v;
      gaps.push_back(trials[t].maxGap);
      pushBehaviorRow(r, g, t, gp, delta, trials[t], gp.eps, v);
    }
    addFrequency(r, "violation_freq", g, hits, cfg.trials, delta);
    hitsPerGrid.push_back(hits);
    medians.push_back(median(gaps));
    r.aggregates.push_back({"median_max_gap", static_cast<std::int64_t>(g), medians.back(), {}, {}, {}});
    r.aggregates.push_back({"min_true_loss", static_cast<std::int64_t>(g), oracle.minTrueLoss(), {}, {}, {}});
  }
  for (auto g : cfg.checkedPoints()) {
    assertFrequency(r, "gap_violation_freq_le_delta", g, hitsPerGrid[g], cfg.trials, deltaOr(cfg.grid[g], 0.05));
  }
  gapDiagnostic(r, medians);
  return r;
}

namespace detail {

inline std::vector<FiniteDistribution> finiteMembers(const std::vector<PerturbationDistribution>& v,
                                                     const std::string& who) {
  std::vector<FiniteDistribution> out;
  for (const auto& d : v) {
    const auto* u = std::get_if<FiniteDistribution>(&d);
    require(u != nullptr, who + ": family members must have finite support");
    out.push_back(*u);
  }
  return out;
}

/// Replaces every repSet with a greedy TV cover of the true set.
inline TaskInstance withGreedyCover(const TaskInstance& task, std::size_t k) {
  std::vector<TaskExample> ex = task.examples();
  for (auto& e : ex) {
    const auto cover = buildRepresentativeCover(finiteMembers(e.family.trueSet, "model1"), k ? k : e.family.k);
    e.family.repSet = std::vector<PerturbationDistribution>(cover.reps.begin(), cover.reps.end());
  }
  return TaskInstance(std::move(ex));
}

/// Achieved epsilon': max over examples and true members of the TV distance
/// to the nearest representative.
inline double achievedCoverRadius(const TaskInstance& task) {
  double radius = 0.0;
  for (const auto& e : task.examples()) {
    const auto reps = finiteMembers(*e.family.repSet, "model1");
    for (const auto& u : finiteMembers(e.family.trueSet, "model1")) {
      double nearest = INFINITY;
      for (const auto& rr : reps) nearest = std::min(nearest, tvDistance(u, rr));
      radius = std::max(radius, nearest);
    }
  }
  return radius;
}

inline ExperimentReport runModel(const ExperimentConfig& cfg, std::size_t jobs, int model) {
  const std::string who = model == 1 ? "model1" : "model2";
  auto task = tasks::resolve(cfg.task);
  require(task.allFinite(FamilyView::trueSet), who + ": task must have finite perturbation sets");
  const auto coverMode = cfg.option<std::string>("cover", "given");
  if (coverMode == "greedy") {
    task = withGreedyCover(task, cfg.option<std::size_t>("k", 0));
  } else {
    require(coverMode == "given", who + ": option cover must be 'given' or 'greedy'");
    require(task.hasRepSets(), who + ": every example needs a repSet (or set options.cover: greedy)");
  }
  require(task.allFinite(FamilyView::repSet), who + ": representatives must have finite support");
  double epsPrime = 0.0;
  if (model == 1) {
    epsPrime = achievedCoverRadius(task);
  } else {
    for (std::size_t i = 0; i < task.size(); ++i) {
      const auto reps = finiteMembers(*task[i].family.repSet, who);
      const auto members = finiteMembers(task[i].family.trueSet, who);
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (auto z = pointwiseCoverViolation(members[j], reps)) {
          throw ConfigError(who + ": pointwise cover violated at example " + std::to_string(i) + ", true member " +
                            std::to_string(j) + ", point " + pointToJson(*z).dump());
        }
      }
    }
  }
  const auto k = task.maxFamilySize(FamilyView::repSet);
  const auto regime = cfg.option<std::string>("regime", "realizable");
  require(regime == "realizable" || regime == "agnostic", who + ": option regime must be 'realizable' or 'agnostic'");
  const bool agnostic = regime == "agnostic";
  const auto cls = tasks::resolveClass(cfg.cls, task);
  const BehaviorOracle oracle(task, cls);

  auto r = newReport(cfg, behaviorColumns());
  r.aggregates.push_back({"eps_prime", -1, epsPrime, {}, {}, {}});
  r.aggregates.push_back({"k", -1, static_cast<double>(k), {}, {}, {}});
  std::vector<std::uint64_t> hitsPerGrid;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    requireSampleSizes(gp, who);
    const double delta = deltaOr(gp, 0.05);
    const double bound = model == 1 ? gp.eps + epsPrime : static_cast<double>(k) * gp.eps;
    const auto trials = parallelMap(cfg.trials, jobs, [&](std::size_t t) {
      return behaviorTrial(task, cls, oracle, gp, FamilyView::repSet, false, trialRng(cfg, g, t));
    });
    std::uint64_t hits = 0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const bool v = agnostic ? trials[t].maxGap > bound : trials[t].popLoss >= bound;
      hits += v;
      pushBehaviorRow(r, g, t, gp, delta, trials[t], bound, v);
    }
    addFrequency(r, "violation_freq", g, hits, cfg.trials, delta);
    hitsPerGrid.push_back(hits);
  }
  for (auto g : cfg.checkedPoints()) {
    assertFrequency(r, "bound_violation_freq_le_delta", g, hitsPerGrid[g], cfg.trials, deltaOr(cfg.grid[g], 0.05));
  }
  return r;
}

}  // namespace detail

inline ExperimentReport runModel1(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  return detail::runModel(cfg, jobs, 1);
}

inline ExperimentReport runModel2(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  return detail::runModel(cfg, jobs, 2);
}

inline ExperimentReport runDoubleSampling(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto task = tasks::resolve(cfg.task);
  require(task.allFinite(FamilyView::trueSet), "double-sampling: task must have finite perturbation sets");
  const auto cls = tasks::resolveClass(cfg.cls, task);
  const BehaviorOracle oracle(task, cls);
  auto r = newReport(cfg, {"grid", "pair", "n", "m", "eps", "event_a", "event_b"});
  struct Pair {
    bool a = false, b = false;
  };
  std::vector<std::pair<std::uint64_t, std::uint64_t>> counts;
  std::vector<double> sigmas;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    requireSampleSizes(gp, "double-sampling");
    const auto pairs = parallelMap(cfg.trials, jobs, [&](std::size_t t) {
      auto rng = trialRng(cfg, g, t);
      LearnConfig lc;
      lc.n = gp.n;
      lc.m = gp.m;
      const auto s = drawTrainingSet(task, lc, rng);
      const auto s2 = drawTrainingSet(task, lc, rng);
      const auto idx = oracle.index(s);
      const auto idx2 = oracle.index(s2);
      Pair p;
      for (std::size_t b = 0; b < oracle.size(); ++b) {
        const auto& labels = oracle.behaviors()[b].labels;
        if (idx.errorSum(labels) != 0) continue;
        p.a = p.a || oracle.trueLoss(b) >= gp.eps;
        p.b = p.b || idx2.loss(labels) >= gp.eps / 2.0;
      }
      return p;
    });
    std::uint64_t na = 0, nb = 0;
    stats::MeanAccumulator diff;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      na += pairs[t].a;
      nb += pairs[t].b;
      diff.add((pairs[t].b ? 1.0 : 0.0) - 0.4 * (pairs[t].a ? 1.0 : 0.0));
      r.rows.push_back({I(g), I(t), I(gp.n), I(gp.m), gp.eps, B(pairs[t].a), B(pairs[t].b)});
    }
    addFrequency(r, "pr_a", g, na, cfg.trials, {});
    addFrequency(r, "pr_b", g, nb, cfg.trials, {});
    r.aggregates.push_back({"pr_b_minus_0.4_pr_a", static_cast<std::int64_t>(g), diff.mean(),
                            diff.mean() - 3.0 * diff.stderror(), diff.mean() + 3.0 * diff.stderror(), 0.0});
    counts.emplace_back(na, nb);
    sigmas.push_back(diff.stderror());
  }
  for (auto g : cfg.checkedPoints()) {
    const auto [na, nb] = counts[g];
    const double pa = static_cast<double>(na) / static_cast<double>(cfg.trials);
    const double pb = static_cast<double>(nb) / static_cast<double>(cfg.trials);
    if (na == 0) {
      r.assertThat("pr_b_ge_0.4_pr_a" + gridLabel(g), true, "vacuous: no A events (pr_b=" + num(pb) + ")");
      continue;
    }
    r.assertThat("pr_b_ge_0.4_pr_a" + gridLabel(g), pb >= 0.4 * pa - 3.0 * sigmas[g],
                 "pr_a=" + num(pa) + " pr_b=" + num(pb) + " sigma=" + num(sigmas[g]));
  }
  return r;
}

namespace detail {

/// Misclassification count per support point of a finite member.
inline std::vector<char> wrongOn(const Hypothesis& h, const FiniteDistribution& u, Label y) {
  std::vector<char> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = h(u.support()[i]) != y;
  return w;
}

inline std::uint64_t countWrong(const std::vector<std::uint64_t>& counts, const std::vector<char>& wrong) {
  std::uint64_t errs = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) errs += wrong[i] ? counts[i] : 0;
  return errs;
}

}  // namespace detail

/// Tail frequencies of the two concentration steps for a fixed h:
///   kind "inner": max_u |err_u(m draws) - err_u| >= eps/8, against 2 exp(-m eps^2 / 32)
///   kind "clean": |mean over n clean draws of f - E f| >= eps/4, against 2 exp(-n eps^2 / 8)
/// where f(x, y) is the per-example max over members of the inner error rate.
inline ExperimentReport runHoeffdingSuite(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto task = tasks::resolve(cfg.task);
  require(task.allFinite(FamilyView::trueSet), "hoeffding: task must have finite perturbation sets");
  const Hypothesis h = cfg.options.contains("hypothesis") ? hypothesisFromJson(cfg.options.at("hypothesis"))
                                                          : Hypothesis(Threshold{2.5});
  const auto example = cfg.option<std::size_t>("example", task.size() - 1);
  require(example < task.size(), "hoeffding: option example out of range");
  const auto innerM = cfg.option<std::size_t>("inner_m", 100);

  // Exact per-member error rates and per-support misclassification masks.
  std::vector<std::vector<FiniteDistribution>> members;
  std::vector<std::vector<std::vector<char>>> wrong;
  for (const auto& e : task.examples()) {
    members.push_back(finiteMembers(e.family.trueSet, "hoeffding"));
    std::vector<std::vector<char>> w;
    for (const auto& u : members.back()) w.push_back(wrongOn(h, u, e.example.y));
    wrong.push_back(std::move(w));
  }

  auto r = newReport(cfg, {"grid", "rep", "kind", "n", "m", "eps", "deviation", "threshold", "exceeded"});
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    require(gp.kind == "inner" || gp.kind == "clean", "hoeffding: grid kind must be 'inner' or 'clean'");
    require(!std::isnan(gp.eps), "hoeffding: every grid point needs eps");
    const bool inner = gp.kind == "inner";
    require(inner ? gp.m >= 1 : gp.n >= 1, "hoeffding: inner points need m, clean points need n");
    const double thresh = inner ? gp.eps / 8.0 : gp.eps / 4.0;
    const double bound = inner ? 2.0 * std::exp(-static_cast<double>(gp.m) * gp.eps * gp.eps / 32.0)
                               : 2.0 * std::exp(-static_cast<double>(gp.n) * gp.eps * gp.eps / 8.0);
    const auto devs = parallelMap(cfg.trials, jobs, [&](std::size_t t) {
      auto rng = trialRng(cfg, g, t);
      if (inner) {
        double dev = 0.0;
        const auto& ms = members[example];
        for (std::size_t j = 0; j < ms.size(); ++j) {
          const auto counts = ms[j].drawCounts(gp.m, rng);
          const double rate = static_cast<double>(countWrong(counts, wrong[example][j])) / static_cast<double>(gp.m);
          dev = std::max(dev, std::abs(rate - memberLoss(h, ms[j], task[example].example.y)));
        }
        return dev;
      }
      const std::size_t m = gp.m ? gp.m : innerM;
      std::vector<double> f(task.size());
      double ef = 0.0;
      for (std::size_t e = 0; e < task.size(); ++e) {
        std::uint64_t worst = 0;
        for (std::size_t j = 0; j < members[e].size(); ++j) {
          worst = std::max(worst, countWrong(members[e][j].drawCounts(m, rng), wrong[e][j]));
        }
        f[e] = static_cast<double>(worst) / static_cast<double>(m);
        ef += task[e].prob * f[e];
      }
      double mean = 0.0;
      for (std::size_t i = 0; i < gp.n; ++i) mean += f[task.drawIndex(rng)];
      return std::abs(mean / static_cast<double>(gp.n) - ef);
    });
    std::uint64_t hits = 0;
    for (std::size_t t = 0; t < devs.size(); ++t) {
      const bool exceeded = devs[t] >= thresh;
      hits += exceeded;
      r.rows.push_back({I(g), I(t), gp.kind, I(gp.n), I(gp.m), gp.eps, devs[t], thresh, B(exceeded)});
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(cfg.trials);
    addFrequency(r, "tail_freq", g, hits, cfg.trials, bound);
    const double slack = stats::threeSigma(std::min(bound, 1.0), cfg.trials);
    if (bound >= 1.0) {
      r.assertThat("tail_freq_le_bound" + gridLabel(g), true, "vacuous: bound=" + num(bound));
    } else {
      r.assertThat("tail_freq_le_bound" + gridLabel(g), freq <= bound + slack,
                   "freq=" + num(freq) + " bound=" + num(bound) + " slack=" + num(slack));
    }
  }
  return r;
}

namespace detail {

inline std::vector<double> levelsOption(const ExperimentConfig& cfg) {
  if (!cfg.options.contains("levels")) return {0.2};
  return cfg.options.at("levels").get<std::vector<double>>();
}

inline std::size_t trialsFor(const GridPoint& gp, std::size_t aSize) {
  return gp.t ? gp.t : requiredTrials(gp.eta, aSize, gp.delta);
}

inline void requireDerandPoint(const GridPoint& gp, const std::string& who) {
  require(!std::isnan(gp.eta), who + ": every grid point needs eta");
  require(!std::isnan(gp.delta), who + ": every grid point needs delta");
}

inline std::string joinDraws(const std::vector<Draw>& seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? ";" : "") + drawToHex(seeds[i]);
  return s;
}

}  // namespace detail

/// Re-derandomizes a synthetic base classifier with known epsilon(x, y) and
/// checks the derandomized DR against delta + epsilon(eta).
inline ExperimentReport runDerandClassifier(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto syn = tasks::syntheticDerand(cfg.option<std::size_t>("examples", 10), cfg.option<std::size_t>("a_size", 8),
                                          levelsOption(cfg), cfg.option<bool>("ramp", false));
  const bool emitSeeds = cfg.option<bool>("emit_seeds", false);
  const auto base = tasks::syntheticClassifier(syn.truth);
  double eps = 0.0;
  for (std::size_t i = 0; i < syn.perExampleEps.size(); ++i) eps += syn.task.examples()[i].prob * syn.perExampleEps[i];

  std::vector<std::string> cols = {"grid", "trial", "t", "eta", "delta", "dr", "eps_eta", "bound", "violation", "seed"};
  if (emitSeeds) cols.push_back("seeds");
  auto r = newReport(cfg, cols);
  r.aggregates.push_back({"eps", -1, eps, {}, {}, {}});
  std::vector<std::uint64_t> hitsPerGrid;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    requireDerandPoint(gp, "derand-classifier");
    const auto t = trialsFor(gp, syn.task.maxASize());
    const double epsEta = epsilonEta(syn.task, syn.perExampleEps, gp.eta);
    const double markov = 2.0 * eps / (1.0 - 2.0 * gp.eta);
    r.assertThat("eps_eta_le_markov" + gridLabel(g), epsEta <= markov + 1e-12,
                 "eps_eta=" + num(epsEta) + " 2eps/(1-2eta)=" + num(markov));
    const double bound = gp.delta + epsEta;
    struct Run {
      double dr = 0.0;
      std::string seeds;
    };
    const auto runs = parallelMap(cfg.trials, jobs, [&](std::size_t k) {
      auto rng = trialRng(cfg, g, k);
      const auto det = derandomizeClassifier(base, t, rng);
      return Run{evaluateDerandDr(det, syn.task), emitSeeds ? joinDraws(det.seeds()) : std::string()};
    });
    std::uint64_t hits = 0;
    stats::MeanAccumulator dr;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const bool v = runs[k].dr > bound;
      hits += v;
      dr.add(runs[k].dr);
      std::vector<Cell> row = {I(g), I(k), I(t), gp.eta, gp.delta, runs[k].dr, epsEta, bound, B(v),
                               drawToHex(deriveSeed(cfg.masterSeed, g, k))};
      if (emitSeeds) row.push_back(runs[k].seeds);
      r.rows.push_back(std::move(row));
    }
    addFrequency(r, "violation_freq", g, hits, cfg.trials, gp.delta);
    r.aggregates.push_back({"mean_dr", static_cast<std::int64_t>(g), dr.mean(), {}, {}, bound});
    r.aggregates.push_back({"t", static_cast<std::int64_t>(g), static_cast<double>(t), {}, {}, {}});
    hitsPerGrid.push_back(hits);
  }
  for (auto g : cfg.checkedPoints()) {
    assertFrequency(r, "violation_freq_le_delta", g, hitsPerGrid[g], cfg.trials, cfg.grid[g].delta);
  }
  return r;
}

/// Re-derandomizes a synthetic certifier whose radius lands in band with a
/// known per-draw probability and checks the median band violation.
inline ExperimentReport runDerandCertifier(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto syn = tasks::syntheticDerand(cfg.option<std::size_t>("examples", 10), cfg.option<std::size_t>("a_size", 8),
                                          {0.0});
  const double inBand = cfg.option<double>("in_band", 0.9);
  require(inBand >= 0.0 && inBand <= 1.0, "derand-certifier: in_band must lie in [0, 1]");
  const bool emitSeeds = cfg.option<bool>("emit_seeds", false);
  // gamma(rho, x, y): worst per-draw out-of-band probability over A(x).
  const std::vector<double> gamma(syn.task.examples().size(), 1.0 - inBand);

  std::vector<std::string> cols = {"grid", "trial", "t", "eta", "delta", "alpha", "beta", "band_violation",
                                   "undefined", "eps_eta", "bound", "violation", "seed"};
  if (emitSeeds) cols.push_back("seeds");
  auto r = newReport(cfg, cols);
  std::vector<std::uint64_t> hitsPerGrid;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    requireDerandPoint(gp, "derand-certifier");
    const double alpha = std::isnan(gp.alpha) ? 0.5 : gp.alpha;
    const double beta = std::isnan(gp.beta) ? 0.5 : gp.beta;
    require(alpha >= 0.0 && beta >= 0.0 && beta <= 1.0, "derand-certifier: need alpha >= 0 and beta in [0, 1]");
    const auto cert = tasks::syntheticCertifier(syn.task, inBand, alpha, beta);
    const auto t = trialsFor(gp, syn.task.maxASize());
    const double epsEta = epsilonEta(syn.task, gamma, gp.eta);
    const double bound = epsEta + gp.delta;
    struct Run {
      BandResult band;
      std::string seeds;
    };
    const auto runs = parallelMap(cfg.trials, jobs, [&](std::size_t k) {
      auto rng = trialRng(cfg, g, k);
      const auto det = derandomizeCertifier(cert, t, rng);
      return Run{evaluateCertBand(det, syn.task, alpha, beta), emitSeeds ? joinDraws(det.seeds()) : std::string()};
    });
    std::uint64_t hits = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const bool v = runs[k].band.value > bound;
      hits += v;
      std::vector<Cell> row = {I(g), I(k), I(t), gp.eta, gp.delta, alpha, beta, runs[k].band.value,
                               I(runs[k].band.undefined), epsEta, bound, B(v),
                               drawToHex(deriveSeed(cfg.masterSeed, g, k))};
      if (emitSeeds) row.push_back(runs[k].seeds);
      r.rows.push_back(std::move(row));
    }
    addFrequency(r, "violation_freq", g, hits, cfg.trials, gp.delta);
    r.aggregates.push_back({"t", static_cast<std::int64_t>(g), static_cast<double>(t), {}, {}, {}});
    hitsPerGrid.push_back(hits);
  }
  for (auto g : cfg.checkedPoints()) {
    assertFrequency(r, "violation_freq_le_delta", g, hitsPerGrid[g], cfg.trials, cfg.grid[g].delta);
  }
  return r;
}

namespace detail {

/// Finite stand-in for the ball of radius r around x: `points` evenly spaced
/// shifts in 1-d; in higher dimension x itself plus two rings in the first
/// two coordinates at radius r/2 and r.
inline std::vector<Point> shiftGrid(const Point& x, double r, std::size_t points) {
  if (r == 0.0 || points <= 1) return {x};
  std::vector<Point> out;
  if (x.size() == 1) {
    for (std::size_t j = 0; j < points; ++j) {
      out.emplace_back(x[0] + r * (2.0 * static_cast<double>(j) / static_cast<double>(points - 1) - 1.0));
    }
    return out;
  }
  out.push_back(x);
  const std::size_t ring = (points - 1) / 2;
  for (double rad : {r / 2.0, r}) {
    for (std::size_t j = 0; j < std::max<std::size_t>(ring, 1); ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(std::max<std::size_t>(ring, 1));
      Point p = x;
      std::vector<double> c(p.coords().begin(), p.coords().end());
      c[0] += rad * std::cos(a);
      c[1] += rad * std::sin(a);
      out.emplace_back(std::span<const double>(c));
    }
  }
  return out;
}

/// Exact Pr_eta[h(x' + eta) != y] for a threshold in 1-d.
inline double exactThresholdNoiseError(double t, double xp, Label y, double sigma) {
  const double below = stats::normalCdf((t - xp) / sigma);  // Pr[x' + eta < t], labeled -1
  return y == kPos ? below : 1.0 - below;
}

}  // namespace detail

/// Trains on Gaussian representatives, then measures the smoothed loss at x
/// and its worst value over a finite shift grid around x, with one common
/// set of noise draws. The excess must stay below d(radius) + slack.
inline ExperimentReport runSmoothing(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  using namespace detail;
  const auto noiseDraws = cfg.option<std::size_t>("noise_draws", 20000);
  const auto shiftPoints = cfg.option<std::size_t>("shift_points", 21);
  const double slack = cfg.option<double>("mc_slack", 0.01);
  require(noiseDraws >= 1, "smoothing: noise_draws must be >= 1");

  auto r = newReport(cfg, {"grid", "trial", "sigma", "radius", "n", "m", "clean_loss", "worst_loss", "excess",
                           "exact_excess", "d_bound", "violation", "hypothesis"});
  std::vector<std::uint64_t> hitsPerGrid;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    require(gp.n >= 1 && gp.m >= 1, "smoothing: every grid point needs n >= 1 and m >= 1");
    const double sigma = std::isnan(gp.sigma) ? 1.0 : gp.sigma;
    const double radius = std::isnan(gp.radius) ? 0.0 : gp.radius;
    const auto task = tasks::resolve(cfg.task, sigma);
    const auto cls = tasks::resolveClass(cfg.cls, task);
    require(task.hasRepSets(), "smoothing: task needs representatives to train on");
    const double dBound = gaussianShiftTv(radius, sigma);
    struct Trial {
      double clean = 0.0, worst = 0.0, exactExcess = NAN;
      std::string hypothesis;
    };
    const auto trials = parallelMap(cfg.trials, jobs, [&](std::size_t t) {
      auto rng = trialRng(cfg, g, t);
      LearnConfig lc;
      lc.n = gp.n;
      lc.m = gp.m;
      lc.sampleFrom = FamilyView::repSet;
      lc.cls = cls;
      const auto s = drawTrainingSet(task, lc, rng);
      const auto h = drerm(cls, s);
      const std::size_t dim = task[0].example.x.size();
      std::vector<Point> noise;
      noise.reserve(noiseDraws);
      for (std::size_t i = 0; i < noiseDraws; ++i) {
        std::vector<double> z(dim);
        for (auto& c : z) c = sigma * rng.normal();
        noise.emplace_back(std::span<const double>(z));
      }
      auto smoothedError = [&](const Point& xp, Label y) {
        std::size_t errs = 0;
        for (const auto& eta : noise) errs += h(xp + eta) != y;
        return static_cast<double>(errs) / static_cast<double>(noiseDraws);
      };
      const auto* th = std::get_if<Threshold>(&h.params());
      Trial out;
      out.hypothesis = hypothesisToJson(h).dump();
      double exactClean = 0.0, exactWorst = 0.0;
      for (const auto& e : task.examples()) {
        const auto& x = e.example.x;
        const Label y = e.example.y;
        const double clean = smoothedError(x, y);
        double worst = 0.0, exWorst = 0.0;
        for (const auto& xp : shiftGrid(x, radius, shiftPoints)) {
          worst = std::max(worst, smoothedError(xp, y));
          if (th && dim == 1) exWorst = std::max(exWorst, exactThresholdNoiseError(th->t, xp[0], y, sigma));
        }
        out.clean += e.prob * clean;
        out.worst += e.prob * worst;
        if (th && dim == 1) {
          exactClean += e.prob * exactThresholdNoiseError(th->t, x[0], y, sigma);
          exactWorst += e.prob * exWorst;
        }
      }
      if (th && dim == 1) out.exactExcess = exactWorst - exactClean;
      return out;
    });
    std::uint64_t hits = 0;
    double maxExcess = 0.0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const double excess = trials[t].worst - trials[t].clean;
      const bool v = excess > dBound + slack;
      hits += v;
      maxExcess = std::max(maxExcess, excess);
      r.rows.push_back({I(g), I(t), sigma, radius, I(gp.n), I(gp.m), trials[t].clean, trials[t].worst, excess,
                        trials[t].exactExcess, dBound, B(v), trials[t].hypothesis});
    }
    addFrequency(r, "violation_freq", g, hits, cfg.trials, 0.0);
    r.aggregates.push_back({"max_excess", static_cast<std::int64_t>(g), maxExcess, {}, {}, dBound + slack});
    hitsPerGrid.push_back(hits);
    r.assertThat("excess_le_d_plus_slack" + gridLabel(g), hits == 0,
                 "max_excess=" + num(maxExcess) + " d=" + num(dBound) + " slack=" + num(slack));
  }
  return r;
}

/// Built-in configuration per experiment kind; matches configs/<kind>.yaml.
inline ExperimentConfig defaultConfig(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.masterSeed = 1;
  auto pt = [](std::size_t n, std::size_t m, double eps, double delta) {
    GridPoint g;
    g.n = n;
    g.m = m;
    g.eps = eps;
    g.delta = delta;
    return g;
  };
  switch (kind) {
    case ExperimentKind::realizable:
      c.task = "t1";
      c.trials = 500;
      c.grid = {pt(10, 10, 0.1, 0.05), pt(50, 50, 0.1, 0.05), pt(200, 200, 0.1, 0.05)};
      break;
    case ExperimentKind::agnostic:
      c.task = "t1-noisy";
      c.trials = 500;
      c.grid = {pt(10, 10, 0.15, 0.05), pt(50, 50, 0.15, 0.05), pt(200, 200, 0.15, 0.05)};
      break;
    case ExperimentKind::model1:
      c.task = "model1";
      c.trials = 500;
      c.grid = {pt(200, 200, 0.1, 0.05)};
      break;
    case ExperimentKind::model2:
      c.task = "model2";
      c.trials = 500;
      c.grid = {pt(200, 200, 0.1, 0.05)};
      break;
    case ExperimentKind::doubleSampling:
      c.task = "near-threshold";
      c.trials = 20000;
      c.grid = {pt(4, 3, 0.09, 0.05)};
      break;
    case ExperimentKind::hoeffding: {
      c.task = "t1";
      c.trials = 10000;
      auto inner = [](std::size_t m, double eps) {
        GridPoint g;
        g.kind = "inner";
        g.m = m;
        g.eps = eps;
        return g;
      };
      auto clean = [](std::size_t n, double eps) {
        GridPoint g;
        g.kind = "clean";
        g.n = n;
        g.eps = eps;
        return g;
      };
      c.grid = {inner(800, 0.4), inner(3200, 0.2), clean(200, 0.4), clean(800, 0.2)};
      break;
    }
    case ExperimentKind::derandClassifier:
    case ExperimentKind::derandCertifier: {
      c.task = "synthetic";
      c.trials = 200;
      GridPoint g;
      g.eta = 0.25;
      g.delta = 0.05;
      if (kind == ExperimentKind::derandCertifier) {
        g.alpha = 0.5;
        g.beta = 0.5;
      }
      c.grid = {g};
      break;
    }
    case ExperimentKind::smoothing: {
      c.task = "smoothing-1d";
      c.trials = 20;
      for (double rad : {0.0, 0.25, 0.5}) {
        GridPoint g;
        g.n = 50;
        g.m = 20;
        g.sigma = 1.0;
        g.radius = rad;
        c.grid.push_back(g);
      }
      break;
    }
  }
  return c;
}

inline ExperimentReport run(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  try {
    switch (cfg.kind) {
      case ExperimentKind::realizable: return runRealizable(cfg, jobs);
      case ExperimentKind::agnostic: return runAgnostic(cfg, jobs);
      case ExperimentKind::model1: return runModel1(cfg, jobs);
      case ExperimentKind::model2: return runModel2(cfg, jobs);
      case ExperimentKind::doubleSampling: return runDoubleSampling(cfg, jobs);
      case ExperimentKind::hoeffding: return runHoeffdingSuite(cfg, jobs);
      case ExperimentKind::derandClassifier: return runDerandClassifier(cfg, jobs);
      case ExperimentKind::derandCertifier: return runDerandCertifier(cfg, jobs);
      case ExperimentKind::smoothing: return runSmoothing(cfg, jobs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("options: ") + e.what());
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace darl::xprun
