#pragma once

// Experiment configuration. Files are YAML:
//
//   experiment: realizable
//   task: t1                  # built-in name, or file:<path to task JSON>
//   class: threshold-1d
//   trials: 500
//   seed: 7
//   grid:
//     - {n: 10, m: 10, eps: 0.1, delta: 0.05}
//     - {n: 200, m: 200, eps: 0.1, delta: 0.05, check: true}
//   options: {...}            # experiment-specific knobs
//
// Grid points marked `check: true` are where statistical assertions apply;
// when none is marked, the last grid point is checked.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "darl/json_io.hpp"
#include "darl/xprun/report.hpp"

namespace darl::xprun {

enum class ExperimentKind {
  realizable,
  agnostic,
  model1,
  model2,
  doubleSampling,
  hoeffding,
  derandClassifier,
  derandCertifier,
  smoothing,
};

inline const std::vector<std::pair<ExperimentKind, std::string>>& kindNames() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::realizable, "realizable"},
      {ExperimentKind::agnostic, "agnostic"},
      {ExperimentKind::model1, "model1"},
      {ExperimentKind::model2, "model2"},
      {ExperimentKind::doubleSampling, "double-sampling"},
      {ExperimentKind::hoeffding, "hoeffding"},
      {ExperimentKind::derandClassifier, "derand-classifier"},
      {ExperimentKind::derandCertifier, "derand-certifier"},
      {ExperimentKind::smoothing, "smoothing"},
  };
  return names;
}

inline std::string kindName(ExperimentKind k) {
  for (const auto& [kind, name] : kindNames()) {
    if (kind == k) return name;
  }
  return "unknown";
}

inline ExperimentKind parseKind(const std::string& s) {
  for (const auto& [kind, name] : kindNames()) {
    if (name == s) return kind;
  }
  throw ConfigError("unknown experiment kind '" + s + "'");
}

struct GridPoint {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t t = 0;  // 0: derive from requiredTrials
  double eps = NAN;
  double delta = NAN;
  double eta = NAN;
  double sigma = NAN;
  double radius = NAN;  // shift radius for smoothing
  double alpha = NAN;
  double beta = NAN;
  std::string kind;     // hoeffding: "inner" or "clean"
  bool check = false;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::realizable;
  std::string task = "t1";
  std::string cls = "threshold-1d";
  std::size_t trials = 1;
  std::uint64_t masterSeed = 0;
  std::vector<GridPoint> grid;
  Json options = Json::object();

  /// Grid indices where assertions apply.
  std::vector<std::size_t> checkedPoints() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i].check) out.push_back(i);
    }
    if (out.empty() && !grid.empty()) out.push_back(grid.size() - 1);
    return out;
  }

  template <class T>
  T option(const std::string& key, T fallback) const {
    return options.contains(key) ? options.at(key).get<T>() : fallback;
  }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (grid.empty()) throw ConfigError("grid must be nonempty");
    for (const auto& g : grid) {
      if (!std::isnan(g.eps) && !(g.eps >= 0.0)) throw ConfigError("eps must be >= 0");
      if (!std::isnan(g.delta) && !(g.delta > 0.0 && g.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
      if (!std::isnan(g.eta) && !(g.eta > 0.0 && g.eta < 0.5)) throw ConfigError("eta must lie in (0, 1/2)");
      if (!std::isnan(g.sigma) && !(g.sigma > 0.0)) throw ConfigError("sigma must be > 0");
      if (!std::isnan(g.radius) && !(g.radius >= 0.0)) throw ConfigError("radius must be >= 0");
    }
  }

  Json toJson() const {
    Json j;
    j["experiment"] = kindName(kind);
    j["task"] = task;
    j["class"] = cls;
    j["trials"] = trials;
    j["seed"] = masterSeed;
    Json g = Json::array();
    for (const auto& p : grid) {
      Json jp = Json::object();
      auto put = [&](const char* key, double v) { if (!std::isnan(v)) jp[key] = v; };
      auto putN = [&](const char* key, std::size_t v) { if (v) jp[key] = v; };
      putN("n", p.n);
      putN("m", p.m);
      putN("k", p.k);
      putN("t", p.t);
      put("eps", p.eps);
      put("delta", p.delta);
      put("eta", p.eta);
      put("sigma", p.sigma);
      put("radius", p.radius);
      put("alpha", p.alpha);
      put("beta", p.beta);
      if (!p.kind.empty()) jp["kind"] = p.kind;
      if (p.check) jp["check"] = true;
      g.push_back(std::move(jp));
    }
    j["grid"] = std::move(g);
    j["options"] = options;
    return j;
  }
};

namespace detail {

inline Json yamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Json a = Json::array();
      for (const auto& item : node) a.push_back(yamlToJson(item));
      return a;
    }
    case YAML::NodeType::Map: {
      Json o = Json::object();
      for (const auto& kv : node) o[kv.first.as<std::string>()] = yamlToJson(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const auto& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (s == "true") return true;
      if (s == "false") return false;
      std::int64_t i = 0;
      auto [p1, e1] = std::from_chars(s.data(), s.data() + s.size(), i);
      if (e1 == std::errc{} && p1 == s.data() + s.size()) return i;
      double d = 0.0;
      auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
      if (e2 == std::errc{} && p2 == s.data() + s.size()) return d;
      return s;
    }
  }
  return nullptr;
}

inline std::uint64_t parseSeed(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, e] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (e != std::errc{} || p != s.data() + s.size()) throw ConfigError("seed must be an unsigned 64-bit integer");
  return v;
}

inline GridPoint gridPointFromJson(const Json& j) {
  if (!j.is_object()) throw ConfigError("grid entries must be maps");
  GridPoint g;
  for (const auto& [key, v] : j.items()) {
    auto num = [&]() {
      if (!v.is_number()) throw ConfigError("grid field '" + key + "' must be numeric");
      return v.get<double>();
    };
    auto count = [&]() {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError("grid field '" + key + "' must be a nonnegative integer");
      }
      return static_cast<std::size_t>(v.get<std::int64_t>());
    };
    if (key == "n") g.n = count();
    else if (key == "m") g.m = count();
    else if (key == "k") g.k = count();
    else if (key == "t") g.t = count();
    else if (key == "eps") g.eps = num();
    else if (key == "delta") g.delta = num();
    else if (key == "eta") g.eta = num();
    else if (key == "sigma") g.sigma = num();
    else if (key == "radius") g.radius = num();
    else if (key == "alpha") g.alpha = num();
    else if (key == "beta") g.beta = num();
    else if (key == "kind") g.kind = v.get<std::string>();
    else if (key == "check") g.check = v.get<bool>();
    else throw ConfigError("unknown grid field '" + key + "'");
  }
  return g;
}

}  // namespace detail

inline ExperimentConfig configFromJson(const Json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a map");
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment") c.kind = parseKind(v.get<std::string>());
      else if (key == "task") c.task = v.get<std::string>();
      else if (key == "class") c.cls = v.get<std::string>();
      else if (key == "trials") {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ConfigError("trials must be >= 1");
        c.trials = static_cast<std::size_t>(v.get<std::int64_t>());
      } else if (key == "seed") c.masterSeed = v.is_string() ? detail::parseSeed(v.get<std::string>()) : v.get<std::uint64_t>();
      else if (key == "grid") {
        if (!v.is_array()) throw ConfigError("grid must be a list");
        for (const auto& g : v) c.grid.push_back(detail::gridPointFromJson(g));
      } else if (key == "options") {
        if (!v.is_object()) throw ConfigError("options must be a map");
        c.options = v;
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig parseConfig(const std::string& yamlText) {
  YAML::Node root;
  try {
    root = YAML::Load(yamlText);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return configFromJson(detail::yamlToJson(root));
}

inline ExperimentConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parseConfig(text);
}

/// DARL_SEED and DARL_JOBS, when set.
inline std::optional<std::uint64_t> seedFromEnv() {
  const char* s = std::getenv("DARL_SEED");
  if (!s || !*s) return std::nullopt;
  return detail::parseSeed(s);
}

inline std::optional<std::size_t> jobsFromEnv() {
  const char* s = std::getenv("DARL_JOBS");
  if (!s || !*s) return std::nullopt;
  const auto v = detail::parseSeed(s);
  if (v == 0) throw ConfigError("DARL_JOBS must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace darl::xprun
