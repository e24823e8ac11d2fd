// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "darl/xprun/experiments.hpp"
#include "oracles.hpp"

using namespace darl;
using namespace darl::xprun;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v) { return formatNumber(v); }

double aggregateValue(const ExperimentReport& r, const std::string& name, std::int64_t grid) {
  for (const auto& a : r.aggregates) {
    if (a.name == name && a.grid == grid) return a.value;
  }
  return NAN;
}

std::string failedAssertions(const ExperimentReport& r) {
  std::string s;
  for (const auto& a : r.assertions) {
    if (!a.passed) s += (s.empty() ? "" : "; ") + a.name + " " + a.detail;
  }
  return s;
}

Outcome fromReport(const ExperimentReport& r, std::string summary) {
  if (r.passed()) return {true, std::move(summary)};
  return {false, summary + "; failed: " + failedAssertions(r)};
}

// Reports of suites 2-9 at the default seed, kept for the determinism check.
std::vector<std::pair<ExperimentConfig, ExperimentReport>> g_reports;

ExperimentReport runKept(const ExperimentConfig& cfg) {
  auto r = run(cfg, jobs());
  g_reports.emplace_back(cfg, r);
  return r;
}

Outcome oracleExactness() {
  const std::size_t tasks = 200, hyps = 100, nm = 10000;
  const auto counts = parallelMap(tasks, jobs(), [&](std::size_t i) {
    Rng rng(deriveSeed(2024, i));
    const auto task = tasks::randomFiniteTask(rng, 6, 3);
    const McLossEstimator mc(task, FamilyView::trueSet, nm, nm, rng);
    const auto domain = tasks::integerDomain(6);
    std::array<std::size_t, 3> out{0, 0, 0};  // above, below, zero-SE mismatches
    for (std::size_t h = 0; h < hyps; ++h) {
      std::vector<Label> labels(domain.size());
      for (auto& l : labels) l = rng.uniform() < 0.5 ? kNeg : kPos;
      const auto hyp = HypothesisClass::finiteTables(domain, {labels}).table(0);
      const auto est = mc.evaluate(hyp);
      const double exact = populationDrLossExact(hyp, task);
      if (est.stdError == 0.0) {
        out[2] += std::abs(est.mean - exact) > 1e-9;
      } else {
        out[0] += est.mean - exact > 3.0 * est.stdError;
        out[1] += exact - est.mean > 3.0 * est.stdError;
      }
    }
    return out;
  });
  std::size_t above = 0, below = 0, mismatch = 0;
  for (const auto& c : counts) {
    above += c[0];
    below += c[1];
    mismatch += c[2];
  }
  const std::size_t exceed = above + below;
  const std::size_t total = tasks * hyps;
  const auto w = stats::wilson(exceed, total);
  // A 3-standard-error band misses with probability 0.0027 under normality.
  const bool ok = mismatch == 0 && w.lo <= 0.0027;
  return {ok, "beyond 3 SE: " + std::to_string(exceed) + "/" + std::to_string(total) + " (" + std::to_string(above) +
                  " above, " + std::to_string(below) + " below; wilson_lo " + fmt(w.lo) +
                  " vs 0.0027), zero-SE mismatches: " + std::to_string(mismatch)};
}

Outcome concentration() {
  const auto r = runKept(defaultConfig(ExperimentKind::hoeffding));
  std::string s = "tail freq";
  for (std::int64_t g = 0; g < 4; ++g) s += " " + fmt(aggregateValue(r, "tail_freq", g));
  return fromReport(r, s);
}

Outcome realizable() {
  const auto r = runKept(defaultConfig(ExperimentKind::realizable));
  return fromReport(r, "violation freq " + fmt(aggregateValue(r, "violation_freq", 0)) + " / " +
                           fmt(aggregateValue(r, "violation_freq", 1)) + " / " +
                           fmt(aggregateValue(r, "violation_freq", 2)));
}

Outcome agnostic() {
  const auto r = runKept(defaultConfig(ExperimentKind::agnostic));
  return fromReport(r, "gap > 0.15 freq at n=m=200: " + fmt(aggregateValue(r, "violation_freq", 2)));
}

Outcome models() {
  const auto r1 = runKept(defaultConfig(ExperimentKind::model1));
  const auto r2 = runKept(defaultConfig(ExperimentKind::model2));
  const double epsPrime = aggregateValue(r1, "eps_prime", -1);
  const double k = aggregateValue(r2, "k", -1);
  const bool covers = std::abs(epsPrime - 0.1) < 1e-12 && k == 2.0;
  std::string s = "model1 eps'=" + fmt(epsPrime) + " freq " + fmt(aggregateValue(r1, "violation_freq", 0)) +
                  "; model2 k=" + fmt(k) + " freq " + fmt(aggregateValue(r2, "violation_freq", 0));
  if (!r1.passed()) s += "; model1 failed: " + failedAssertions(r1);
  if (!r2.passed()) s += "; model2 failed: " + failedAssertions(r2);
  return {covers && r1.passed() && r2.passed(), s};
}

Outcome doubleSampling() {
  std::size_t passed = 0;
  double minMargin = INFINITY;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = defaultConfig(ExperimentKind::doubleSampling);
    cfg.masterSeed = seed;
    const auto r = seed == 1 ? runKept(cfg) : run(cfg, jobs());
    passed += r.passed();
    minMargin = std::min(minMargin, aggregateValue(r, "pr_b", 0) - 0.4 * aggregateValue(r, "pr_a", 0));
  }
  return {passed == 20, std::to_string(passed) + "/20 seeds pass, min pr_b - 0.4 pr_a = " + fmt(minMargin)};
}

Outcome derandClassifier() {
  const auto cfg = defaultConfig(ExperimentKind::derandClassifier);
  const auto r = runKept(cfg);
  const double t = aggregateValue(r, "t", 0);
  bool ok = t == static_cast<double>(requiredTrials(0.25, 8, 0.05));
  // epsilon(eta) <= 2 eps / (1 - 2 eta) on every constructed task.
  std::size_t checked = 0, broken = 0;
  for (const auto& levels : std::vector<std::vector<double>>{{0.2}, {0.2, 0.6}, {0.0, 0.45, 0.3}, {0.25}, {0.5, 0.1, 1.0}}) {
    for (bool ramp : {false, true}) {
      const auto syn = tasks::syntheticDerand(10, 8, levels, ramp);
      double eps = 0.0;
      for (std::size_t i = 0; i < syn.perExampleEps.size(); ++i) eps += syn.task.examples()[i].prob * syn.perExampleEps[i];
      for (double eta : {0.01, 0.1, 0.2, 0.25, 0.3, 0.45, 0.49}) {
        ++checked;
        broken += epsilonEta(syn.task, syn.perExampleEps, eta) > 2.0 * eps / (1.0 - 2.0 * eta) + 1e-12;
      }
    }
  }
  ok = ok && broken == 0;
  auto out = fromReport(r, "t=" + fmt(t) + ", violation freq " + fmt(aggregateValue(r, "violation_freq", 0)) +
                               ", mean DR " + fmt(aggregateValue(r, "mean_dr", 0)) + ", Markov check " +
                               std::to_string(checked - broken) + "/" + std::to_string(checked));
  out.passed = out.passed && ok;
  return out;
}

Outcome derandCertifier() {
  const auto r = runKept(defaultConfig(ExperimentKind::derandCertifier));
  return fromReport(r, "violation freq " + fmt(aggregateValue(r, "violation_freq", 0)) + ", t=" +
                           fmt(aggregateValue(r, "t", 0)));
}

Outcome smoothing() {
  const auto r = runKept(defaultConfig(ExperimentKind::smoothing));
  const double d = gaussianShiftTv(0.5, 1.0);
  const double mc = oracle::shiftedGaussianTvMc(0.5, 1.0, 4000000, 77);
  const bool tvOk = std::abs(d - mc) <= 0.005 && std::abs(d - 0.1974) <= 5e-5;
  auto out = fromReport(r, "max excess " + fmt(aggregateValue(r, "max_excess", 1)) + " / " +
                               fmt(aggregateValue(r, "max_excess", 2)) + ", d(0.5)=" + fmt(d) + " vs MC " + fmt(mc));
  out.passed = out.passed && tvOk;
  return out;
}

Outcome determinism() {
  std::size_t same = 0;
  std::string diff;
  for (const auto& [cfg, first] : g_reports) {
    const auto again = run(cfg, jobs() == 1 ? 2 : 1);
    const bool eq = renderCsv(first) == renderCsv(again) && renderJson(first) == renderJson(again);
    same += eq;
    if (!eq) diff += " " + first.experiment;
  }
  const bool ok = same == g_reports.size() && g_reports.size() == 9;
  return {ok, std::to_string(same) + "/" + std::to_string(g_reports.size()) +
                  " suites byte-identical on re-run with a different job count" + (diff.empty() ? "" : ":" + diff)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budgetSeconds;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle exactness", 120, oracleExactness},
      {2, "concentration suite", 300, concentration},
      {3, "realizable shape", 300, realizable},
      {4, "agnostic shape", 300, agnostic},
      {5, "model I/II bounds", 600, models},
      {6, "double sampling", 600, doubleSampling},
      {7, "derandomized classifier", 180, derandClassifier},
      {8, "derandomized certifier", 180, derandCertifier},
      {9, "smoothing TV bound", 180, smoothing},
      {10, "determinism", 600, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool inTime = secs <= c.budgetSeconds;
    const bool ok = o.passed && inTime;
    failures += !ok;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.1f s of %.0f s", secs, c.budgetSeconds);
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << timing << (inTime ? "" : ", over budget") << "]" << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
