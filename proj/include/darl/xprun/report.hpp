#pragma once

// Experiment reports and their CSV / JSON renderings.
//
// CSV layout:
//   # darl-report v1 experiment=<kind> columns=<c1>;<c2>;...
//   <header row>
//   <one data row per (grid point, trial)>
//   # aggregate,<name>,<grid>,<value>,<lo>,<hi>,<bound>
//   # assertion,<name>,<PASS|FAIL>,<detail>
//
// JSON layout: {"schema": "darl-report/1", "experiment", "config",
// "columns", "rows", "aggregates", "assertions", "passed"}.
//
// Both renderings are pure functions of the report; numbers use the
// shortest round-trip decimal form.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "darl/json_io.hpp"
#include "darl/point.hpp"

namespace darl::xprun {

/// Configuration or I/O problem (exit code 2), as opposed to a failed
/// statistical assertion (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

using Cell = std::variant<std::int64_t, double, std::string>;

struct Aggregate {
  std::string name;
  std::int64_t grid = -1;  // -1: whole experiment
  double value = 0.0;
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<double> bound;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  Json config = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<Aggregate> aggregates;
  std::vector<Assertion> assertions;
  double wallSeconds = 0.0;  // console only; never rendered, to keep files byte-stable

  bool passed() const {
    for (const auto& a : assertions) {
      if (!a.passed) return false;
    }
    return true;
  }

  void assertThat(std::string name, bool ok, std::string detail) {
    assertions.push_back({std::move(name), ok, std::move(detail)});
  }
};

inline std::string formatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string formatCell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return formatNumber(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string renderCsv(const ExperimentReport& r) {
  std::string out = "# darl-report v1 experiment=" + r.experiment + " columns=";
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? ";" : "") + r.columns[i];
  out += "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + formatCell(row[i]);
    out += "\n";
  }
  auto opt = [](const std::optional<double>& v) { return v ? formatNumber(*v) : std::string(); };
  for (const auto& a : r.aggregates) {
    out += "# aggregate," + a.name + "," + std::to_string(a.grid) + "," + formatNumber(a.value) + "," + opt(a.lo) +
           "," + opt(a.hi) + "," + opt(a.bound) + "\n";
  }
  for (const auto& a : r.assertions) {
    out += "# assertion," + a.name + "," + (a.passed ? "PASS" : "FAIL") + "," + formatCell(a.detail) + "\n";
  }
  return out;
}

inline Json cellToJson(const Cell& c) {
  return std::visit([](const auto& v) -> Json {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, double>) {
      if (!std::isfinite(v)) return formatNumber(v);
    }
    return v;
  }, c);
}

inline std::string renderJson(const ExperimentReport& r) {
  Json j;
  j["schema"] = "darl-report/1";
  j["experiment"] = r.experiment;
  j["config"] = r.config;
  j["columns"] = r.columns;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json jr = Json::array();
    for (const auto& c : row) jr.push_back(cellToJson(c));
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  Json aggs = Json::array();
  for (const auto& a : r.aggregates) {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    aggs.push_back({{"name", a.name}, {"grid", a.grid}, {"value", a.value},
                    {"lo", opt(a.lo)}, {"hi", opt(a.hi)}, {"bound", opt(a.bound)}});
  }
  j["aggregates"] = std::move(aggs);
  Json asserts = Json::array();
  for (const auto& a : r.assertions) asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  j["assertions"] = std::move(asserts);
  j["passed"] = r.passed();
  return j.dump(2) + "\n";
}

enum class ReportFormat { csv, json };

inline ReportFormat parseFormat(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + s + "' (expected csv or json)");
}

inline std::string render(const ExperimentReport& r, ReportFormat f) {
  return f == ReportFormat::csv ? renderCsv(r) : renderJson(r);
}

inline void emitReport(const ExperimentReport& r, ReportFormat f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << render(r, f);
  if (!out.flush()) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace darl::xprun
