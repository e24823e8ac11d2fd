#pragma once

// JSON forms of the library's value types.
//   Point:               number (1-d) or array of numbers
//   FiniteDistribution:  [[point, prob], ...]
//   Hypothesis:          {"classTag": "...", "params": {...}}
//   Draw lists:          ["0x...", ...] (16 hex digits each)

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "darl/hypo.hpp"
#include "darl/perturb.hpp"
#include "darl/randomized.hpp"

namespace darl {

using Json = nlohmann::ordered_json;

inline Json pointToJson(const Point& p) {
  if (p.size() == 1) return p[0];
  Json a = Json::array();
  for (double c : p.coords()) a.push_back(c);
  return a;
}

inline Point pointFromJson(const Json& j) {
  if (j.is_number()) return Point(j.get<double>());
  if (!j.is_array()) throw Error("point must be a number or an array of numbers");
  std::vector<double> xs;
  for (const auto& c : j) xs.push_back(c.get<double>());
  return Point(std::span<const double>(xs));
}

inline Json distributionToJson(const FiniteDistribution& d) {
  Json a = Json::array();
  for (std::size_t i = 0; i < d.size(); ++i) a.push_back(Json::array({pointToJson(d.support()[i]), d.probs()[i]}));
  return a;
}

inline FiniteDistribution distributionFromJson(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error("distribution must be a nonempty array of [point, prob] pairs");
  std::vector<Point> support;
  std::vector<double> probs;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw Error("distribution entry must be [point, prob]");
    support.push_back(pointFromJson(pair[0]));
    probs.push_back(pair[1].get<double>());
  }
  return {std::move(support), std::move(probs)};
}

inline Json hypothesisToJson(const Hypothesis& h) {
  Json params = Json::object();
  std::visit([&](const auto& p) {
    using T = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<T, Threshold>) {
      params["t"] = p.t;
    } else if constexpr (std::is_same_v<T, Interval>) {
      params["lo"] = p.lo;
      params["hi"] = p.hi;
    } else if constexpr (std::is_same_v<T, AxisRect>) {
      params["lo"] = Json(std::vector<double>(p.lo.begin(), p.lo.end()));
      params["hi"] = Json(std::vector<double>(p.hi.begin(), p.hi.end()));
    } else {
      Json domain = Json::array();
      for (const auto& x : p.domain->points()) domain.push_back(pointToJson(x));
      params["domain"] = domain;
      params["labels"] = p.labels;
    }
  }, h.params());
  return Json{{"classTag", std::string(tagName(h.tag()))}, {"params", params}};
}

inline Hypothesis hypothesisFromJson(const Json& j) {
  const auto tag = parseTag(j.at("classTag").get<std::string>());
  const auto& p = j.at("params");
  switch (tag) {
    case ClassTag::threshold1d: return Threshold{p.at("t").get<double>()};
    case ClassTag::interval1d: return Interval{p.at("lo").get<double>(), p.at("hi").get<double>()};
    case ClassTag::axisRect: {
      auto lo = p.at("lo").get<std::vector<double>>();
      auto hi = p.at("hi").get<std::vector<double>>();
      return AxisRect{Point(std::span<const double>(lo)), Point(std::span<const double>(hi))};
    }
    case ClassTag::finiteTable: {
      std::vector<Point> domain;
      for (const auto& x : p.at("domain")) domain.push_back(pointFromJson(x));
      auto labels = p.at("labels").get<std::vector<Label>>();
      auto cls = HypothesisClass::finiteTables(std::move(domain), {std::move(labels)});
      return cls.table(0);
    }
  }
  throw Error("unreachable");
}

inline std::string drawToHex(Draw d) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(d));
  return buf;
}

inline Draw drawFromHex(const std::string& s) {
  std::string_view v = s;
  if (v.starts_with("0x")) v.remove_prefix(2);
  Draw d = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d, 16);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw Error("bad hex draw '" + s + "'");
  return d;
}

inline Json drawsToJson(const std::vector<Draw>& draws) {
  Json a = Json::array();
  for (Draw d : draws) a.push_back(drawToHex(d));
  return a;
}

inline std::vector<Draw> drawsFromJson(const Json& j) {
  std::vector<Draw> out;
  for (const auto& s : j) out.push_back(drawFromHex(s.get<std::string>()));
  return out;
}

}  // namespace darl
