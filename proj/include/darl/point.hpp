#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace darl {

/// Base exception for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input does not belong to the domain a hypothesis or class is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Binary labels are the integers -1 and +1. Randomized classifiers in
/// derand.hpp may use any integer label set.
using Label = int;
inline constexpr Label kNeg = -1;
inline constexpr Label kPos = +1;

/// A point of the instance space: a real vector of small, fixed-capacity
/// dimension. Value type, no heap allocation.
class Point {
 public:
  static constexpr std::size_t kMaxDim = 8;

  Point() = default;
  Point(double x) : dim_(1) { coords_[0] = x; }  // NOLINT: 1-d convenience
  Point(std::initializer_list<double> xs) : Point(std::span<const double>(xs.begin(), xs.size())) {}
  explicit Point(std::span<const double> xs) : dim_(xs.size()) {
    if (xs.size() > kMaxDim) {
      throw Error("Point: dimension " + std::to_string(xs.size()) + " exceeds " +
                  std::to_string(kMaxDim));
    }
    std::copy(xs.begin(), xs.end(), coords_.begin());
  }

  std::size_t size() const { return dim_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  const double* begin() const { return coords_.data(); }
  const double* end() const { return coords_.data() + dim_; }
  std::span<const double> coords() const { return {coords_.data(), dim_}; }

  friend bool operator==(const Point& a, const Point& b) {
    return a.dim_ == b.dim_ && std::equal(a.begin(), a.end(), b.begin());
  }
  friend bool operator<(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }

 private:
  std::array<double, kMaxDim> coords_{};
  std::size_t dim_ = 0;
};

inline Point operator+(Point a, const Point& b) {
  if (a.size() != b.size()) throw DomainError("Point: dimension mismatch in addition");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

struct LabeledExample {
  Point x;
  Label y = kPos;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

}  // namespace darl
