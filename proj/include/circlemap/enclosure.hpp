#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace circlemap {

/// Closed interval [lo, hi] certified to contain a real quantity.
/// Used for every truncated-series result so that comparisons against it
/// can be made with explicit error bars instead of bare doubles.
struct Enclosure {
  double lo = 0.0;
  double hi = 0.0;

  Enclosure() = default;
  Enclosure(double point) : lo(point), hi(point) {}
  Enclosure(double l, double h) : lo(l), hi(h) {
    if (!(l <= h)) throw std::invalid_argument("Enclosure: lo > hi");
  }

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Enclosure& o) const { return lo <= o.lo && o.hi <= hi; }
  bool entirely_below(double x) const { return hi < x; }
  bool entirely_above(double x) const { return lo > x; }

  Enclosure padded(double eps) const { return Enclosure(lo - eps, hi + eps); }
};

inline Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  return Enclosure(a.lo + b.lo, a.hi + b.hi);
}

inline Enclosure operator-(double x, const Enclosure& e) {
  return Enclosure(x - e.hi, x - e.lo);
}

// positive scale only; that is all the library needs
inline Enclosure operator*(double c, const Enclosure& e) {
  if (c < 0) throw std::invalid_argument("Enclosure scale must be >= 0");
  return Enclosure(c * e.lo, c * e.hi);
}

inline Enclosure operator/(const Enclosure& e, double c) {
  if (c <= 0) throw std::invalid_argument("Enclosure divisor must be > 0");
  return Enclosure(e.lo / c, e.hi / c);
}

}  // namespace circlemap
