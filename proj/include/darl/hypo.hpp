#pragma once

// Binary hypothesis classes with known VC dimension, and exhaustive behavior
// enumeration over a finite point set.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "darl/point.hpp"

namespace darl {

enum class ClassTag { threshold1d, interval1d, axisRect, finiteTable };

inline std::string_view tagName(ClassTag tag) {
  switch (tag) {
    case ClassTag::threshold1d: return "threshold-1d";
    case ClassTag::interval1d: return "interval-1d";
    case ClassTag::axisRect: return "axis-rect-d";
    case ClassTag::finiteTable: return "finite-table";
  }
  return "unknown";
}

inline ClassTag parseTag(std::string_view name) {
  if (name == "threshold-1d") return ClassTag::threshold1d;
  if (name == "interval-1d") return ClassTag::interval1d;
  if (name == "axis-rect-d") return ClassTag::axisRect;
  if (name == "finite-table") return ClassTag::finiteTable;
  throw Error("unknown hypothesis class tag '" + std::string(name) + "'");
}

/// +1 iff x >= t.
struct Threshold {
  double t = 0.0;
  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// +1 iff lo <= x <= hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// +1 iff x lies in the closed box [lo, hi].
struct AxisRect {
  Point lo;
  Point hi;
  friend bool operator==(const AxisRect&, const AxisRect&) = default;
};

/// Sorted, duplicate-free finite domain shared by table hypotheses.
class TableDomain {
 public:
  explicit TableDomain(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error("TableDomain: empty domain");
    std::sort(points_.begin(), points_.end());
    if (std::adjacent_find(points_.begin(), points_.end()) != points_.end()) {
      throw Error("TableDomain: duplicate domain point");
    }
  }

  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  std::size_t indexOf(const Point& x) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), x);
    if (it == points_.end() || !(*it == x)) throw DomainError("finite-table: point outside the domain");
    return static_cast<std::size_t>(it - points_.begin());
  }

 private:
  std::vector<Point> points_;
};

struct Table {
  std::shared_ptr<const TableDomain> domain;
  std::vector<Label> labels;  // aligned with domain->points()

  friend bool operator==(const Table& a, const Table& b) {
    return a.labels == b.labels && a.domain->points() == b.domain->points();
  }
};

class Hypothesis {
 public:
  using Params = std::variant<Threshold, Interval, AxisRect, Table>;

  Hypothesis(Threshold h) : params_(h) {}  // NOLINT
  Hypothesis(Interval h) : params_(h) {    // NOLINT
    if (h.lo > h.hi) throw Error("Interval: lo > hi");
  }
  Hypothesis(AxisRect h) : params_(std::move(h)) {  // NOLINT
    const auto& r = std::get<AxisRect>(params_);
    if (r.lo.size() != r.hi.size()) throw Error("AxisRect: lo/hi dimension mismatch");
    for (std::size_t i = 0; i < r.lo.size(); ++i) {
      if (r.lo[i] > r.hi[i]) throw Error("AxisRect: lo > hi on some axis");
    }
  }
  Hypothesis(Table h) : params_(std::move(h)) {  // NOLINT
    const auto& t = std::get<Table>(params_);
    if (!t.domain || t.labels.size() != t.domain->size()) {
      throw Error("finite-table: table must label every domain point");
    }
  }

  ClassTag tag() const {
    return std::visit([](const auto& p) {
      using T = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<T, Threshold>) return ClassTag::threshold1d;
      else if constexpr (std::is_same_v<T, Interval>) return ClassTag::interval1d;
      else if constexpr (std::is_same_v<T, AxisRect>) return ClassTag::axisRect;
      else return ClassTag::finiteTable;
    }, params_);
  }

  const Params& params() const { return params_; }

  Label operator()(const Point& x) const {
    return std::visit([&](const auto& p) { return predictWith(p, x); }, params_);
  }

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

 private:
  static void require1d(const Point& x) {
    if (x.size() != 1) throw DomainError("1-d hypothesis applied to a point of dimension " + std::to_string(x.size()));
  }
  static Label predictWith(const Threshold& h, const Point& x) {
    require1d(x);
    return x[0] >= h.t ? kPos : kNeg;
  }
  static Label predictWith(const Interval& h, const Point& x) {
    require1d(x);
    return (h.lo <= x[0] && x[0] <= h.hi) ? kPos : kNeg;
  }
  static Label predictWith(const AxisRect& h, const Point& x) {
    if (x.size() != h.lo.size()) throw DomainError("axis-rect: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < h.lo[i] || x[i] > h.hi[i]) return kNeg;
    }
    return kPos;
  }
  static Label predictWith(const Table& h, const Point& x) { return h.labels[h.domain->indexOf(x)]; }

  Params params_;
};

inline Label predict(const Hypothesis& h, const Point& x) { return h(x); }

/// A hypothesis class H together with what is needed to enumerate it.
class HypothesisClass {
 public:
  static HypothesisClass thresholds() { return HypothesisClass(ClassTag::threshold1d); }
  static HypothesisClass intervals() { return HypothesisClass(ClassTag::interval1d); }
  static HypothesisClass axisRects(std::size_t dim) {
    if (dim == 0 || dim > Point::kMaxDim) throw Error("axis-rect: unsupported dimension");
    HypothesisClass c(ClassTag::axisRect);
    c.dim_ = dim;
    return c;
  }
  /// Explicit finite class: one labeling of `domain` per table.
  static HypothesisClass finiteTables(std::vector<Point> domain, std::vector<std::vector<Label>> tables) {
    HypothesisClass c(ClassTag::finiteTable);
    auto original = domain;
    c.domain_ = std::make_shared<const TableDomain>(std::move(domain));
    if (tables.empty()) throw Error("finite-table: class needs at least one table");
    // Re-align labels with the sorted domain.
    for (auto& table : tables) {
      if (table.size() != original.size()) throw Error("finite-table: table must label every domain point");
      std::vector<Label> aligned(table.size());
      for (std::size_t i = 0; i < original.size(); ++i) aligned[c.domain_->indexOf(original[i])] = table[i];
      table = std::move(aligned);
    }
    c.tables_ = std::move(tables);
    return c;
  }
  /// Every labeling of a small domain (2^|domain| tables).
  static HypothesisClass allLabelings(std::vector<Point> domain) {
    if (domain.size() > 20) throw Error("finite-table: domain too large for all labelings");
    std::vector<std::vector<Label>> tables;
    for (std::size_t mask = 0; mask < (std::size_t{1} << domain.size()); ++mask) {
      std::vector<Label> t(domain.size());
      for (std::size_t i = 0; i < domain.size(); ++i) t[i] = (mask >> i) & 1 ? kPos : kNeg;
      tables.push_back(std::move(t));
    }
    return finiteTables(std::move(domain), std::move(tables));
  }
  static HypothesisClass constant(std::vector<Point> domain, Label label) {
    std::vector<Label> t(domain.size(), label);
    return finiteTables(std::move(domain), {std::move(t)});
  }

  ClassTag tag() const { return tag_; }
  std::size_t dim() const { return dim_; }
  const std::shared_ptr<const TableDomain>& domain() const { return domain_; }
  const std::vector<std::vector<Label>>& tables() const { return tables_; }

  /// Known VC dimension; for a finite class, floor(log2 |H|).
  std::size_t vcDim() const {
    switch (tag_) {
      case ClassTag::threshold1d: return 1;
      case ClassTag::interval1d: return 2;
      case ClassTag::axisRect: return 2 * dim_;
      case ClassTag::finiteTable: return static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(tables_.size()))));
    }
    return 0;
  }

  Hypothesis table(std::size_t i) const { return Table{domain_, tables_.at(i)}; }

 private:
  explicit HypothesisClass(ClassTag tag) : tag_(tag) {}

  ClassTag tag_;
  std::size_t dim_ = 1;
  std::shared_ptr<const TableDomain> domain_;
  std::vector<std::vector<Label>> tables_;
};

/// One labeling the class realizes, with a hypothesis that produces it.
struct Behavior {
  std::vector<Label> labels;
  Hypothesis witness;
};

/// Sauer-Shelah: sum_{i<=d} C(n, i).
inline double growthBound(std::size_t n, std::size_t d) {
  double total = 0.0, term = 1.0;
  for (std::size_t i = 0; i <= std::min(n, d); ++i) {
    total += term;
    term = term * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return total;
}

/// Closed-form (e n / d)^d; only valid for n >= d, otherwise 2^n.
inline double sauerBound(std::size_t n, std::size_t d) {
  if (d == 0) return 1.0;
  if (n < d) return std::ldexp(1.0, static_cast<int>(n));
  return std::pow(std::numbers::e * static_cast<double>(n) / static_cast<double>(d), static_cast<double>(d));
}

namespace detail {

inline std::vector<double> distinctCoords(std::span<const Point> pts, std::size_t axis) {
  std::vector<double> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(p[axis]);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Lower and upper cut between consecutive distinct values: below the first
// value when i == 0, above the last when i == size.
inline double cut(const std::vector<double>& v, std::size_t i) {
  if (i == 0) return v.front() - 1.0;
  if (i == v.size()) return v.back() + 1.0;
  return 0.5 * (v[i - 1] + v[i]);
}

inline std::vector<Behavior> behaviorsOnDistinct(const HypothesisClass& cls, std::span<const Point> pts) {
  std::vector<Behavior> out;
  std::map<std::vector<Label>, std::size_t> seen;
  auto offer = [&](const Hypothesis& h) {
    std::vector<Label> labels(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) labels[i] = h(pts[i]);
    if (seen.emplace(labels, out.size()).second) out.push_back({std::move(labels), h});
  };

  switch (cls.tag()) {
    case ClassTag::threshold1d: {
      for (const auto& p : pts) if (p.size() != 1) throw DomainError("threshold-1d: points must be 1-d");
      auto v = distinctCoords(pts, 0);
      for (std::size_t i = 0; i <= v.size(); ++i) offer(Threshold{cut(v, i)});
      break;
    }
    case ClassTag::interval1d: {
      for (const auto& p : pts) if (p.size() != 1) throw DomainError("interval-1d: points must be 1-d");
      auto v = distinctCoords(pts, 0);
      const double below = v.front() - 1.0;
      offer(Interval{below, below});
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i; j < v.size(); ++j) offer(Interval{cut(v, i), cut(v, j + 1)});
      }
      break;
    }
    case ClassTag::axisRect: {
      const std::size_t d = cls.dim();
      for (const auto& p : pts) if (p.size() != d) throw DomainError("axis-rect: dimension mismatch");
      std::vector<std::vector<double>> vals(d);
      for (std::size_t a = 0; a < d; ++a) vals[a] = distinctCoords(pts, a);
      Point lo = pts.front(), hi = pts.front();
      for (std::size_t a = 0; a < d; ++a) lo[a] = hi[a] = vals[a].front() - 1.0;
      offer(AxisRect{lo, hi});
      // Every closed box with faces on distinct coordinate values, in
      // lexicographic order of (lo_0, hi_0, lo_1, hi_1, ...).
      auto recurse = [&](auto&& self, std::size_t axis) -> void {
        if (axis == d) {
          offer(AxisRect{lo, hi});
          return;
        }
        const auto& v = vals[axis];
        for (std::size_t i = 0; i < v.size(); ++i) {
          for (std::size_t j = i; j < v.size(); ++j) {
            lo[axis] = v[i];
            hi[axis] = v[j];
            self(self, axis + 1);
          }
        }
      };
      recurse(recurse, 0);
      break;
    }
    case ClassTag::finiteTable: {
      for (std::size_t i = 0; i < cls.tables().size(); ++i) offer(cls.table(i));
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Every labeling the class realizes on `points`, each with its canonical
/// witness: the first hypothesis in ascending parameter order (table index
/// for finite classes) that produces it. Label vectors align with `points`;
/// repeated points always share a label.
inline std::vector<Behavior> enumerateBehaviors(const HypothesisClass& cls, std::span<const Point> points) {
  if (points.empty()) throw Error("enumerateBehaviors: empty point set");
  std::vector<Point> distinct(points.begin(), points.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  auto onDistinct = detail::behaviorsOnDistinct(cls, distinct);
  std::vector<std::size_t> where(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    where[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), points[i]) - distinct.begin());
  }
  for (auto& b : onDistinct) {
    std::vector<Label> expanded(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) expanded[i] = b.labels[where[i]];
    b.labels = std::move(expanded);
  }
  return onDistinct;
}

}  // namespace darl
