#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bolza {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = std::vector<double>;

// Sum of extended reals. A +inf term dominates a -inf term: the accumulated
// value is +inf as soon as any summand is +inf, -inf only if some summand is
// -inf and none is +inf.
class ExtSum {
 public:
  void add(double v) {
    if (std::isnan(v)) throw std::invalid_argument("ExtSum: NaN term");
    if (v == kInf) {
      has_pos_inf_ = true;
    } else if (v == -kInf) {
      has_neg_inf_ = true;
    } else {
      finite_ += v;
    }
  }
  double value() const {
    if (has_pos_inf_) return kInf;
    if (has_neg_inf_) return -kInf;
    return finite_;
  }

 private:
  double finite_ = 0.0;
  bool has_pos_inf_ = false;
  bool has_neg_inf_ = false;
};

// Closed interval [lo, hi] of the extended line; lo <= hi, infinite ends
// allowed. Used both for subdifferentials and for box coordinates.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  static Interval all() { return {-kInf, kInf}; }
  static Interval point(double z) { return {z, z}; }

  bool valid() const { return lo <= hi && !std::isnan(lo) && !std::isnan(hi); }
  bool contains(double z, double tol = 0.0) const {
    return z >= lo - tol && z <= hi + tol;
  }
  double clamp(double z) const { return std::min(std::max(z, lo), hi); }
  // Distance of a point to the interval; 0 inside.
  double dist(double z) const {
    if (z < lo) return lo - z;
    if (z > hi) return z - hi;
    return 0.0;
  }
  bool is_point() const { return lo == hi; }
  // Inclusion in another interval; on failure *witness is a point of *this
  // outside `other`.
  bool subset_of(const Interval& other, double* witness = nullptr) const {
    if (lo > hi) return true;  // empty
    if (lo < other.lo) {
      if (witness) *witness = lo;
      return false;
    }
    if (hi > other.hi) {
      if (witness) *witness = hi;
      return false;
    }
    return true;
  }
  Interval intersect(const Interval& other) const {
    return {std::max(lo, other.lo), std::min(hi, other.hi)};
  }
};

// Axis-aligned box in R^d: product of closed intervals. An empty box is
// represented by some coordinate with lo > hi.
struct Box {
  std::vector<Interval> coords;

  static Box all(std::size_t d) { return Box{std::vector<Interval>(d)}; }

  std::size_t dim() const { return coords.size(); }
  bool empty() const {
    for (const auto& c : coords)
      if (c.lo > c.hi) return true;
    return false;
  }
  bool contains(const Vec& z, double tol = 0.0) const {
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (!coords[i].contains(z[i], tol)) return false;
    return true;
  }
  Vec clamp(const Vec& z) const {
    Vec out(z);
    for (std::size_t i = 0; i < coords.size(); ++i) out[i] = coords[i].clamp(z[i]);
    return out;
  }
  // Euclidean distance of a point to the box.
  double dist(const Vec& z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      double d = coords[i].dist(z[i]);
      s += d * d;
    }
    return std::sqrt(s);
  }
  Box intersect(const Box& other) const {
    Box out = *this;
    for (std::size_t i = 0; i < coords.size(); ++i)
      out.coords[i] = coords[i].intersect(other.coords[i]);
    return out;
  }
  // Inclusion check; witness coordinate/point reported on failure.
  bool subset_of(const Box& other, int* witness_coord = nullptr,
                 double* witness_point = nullptr) const {
    if (empty()) return true;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      double w;
      if (!coords[i].subset_of(other.coords[i], &w)) {
        if (witness_coord) *witness_coord = static_cast<int>(i);
        if (witness_point) *witness_point = w;
        return false;
      }
    }
    return true;
  }
};

inline double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double norm_inf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline bool approx(double a, double b, double tol) {
  if (a == b) return true;  // covers matching infinities
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace bolza
