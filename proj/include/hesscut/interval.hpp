#pragma once

#include <algorithm>
#include <cmath>

namespace hesscut {

// Closed-interval arithmetic used for panel culling and scale bounds.
// Plain double arithmetic; consumers that certify sign conditions inflate
// results by a few ulps via Interval::inflated.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double a, double b) : lo(std::min(a, b)), hi(std::max(a, b)) {}
  static Interval point(double a) { return Interval(a, a); }

  double width() const { return hi - lo; }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  double mig() const {  // minimum absolute value over the interval
    if (lo <= 0.0 && hi >= 0.0) return 0.0;
    return std::min(std::abs(lo), std::abs(hi));
  }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  Interval inflated(double rel) const {
    double pad = rel * std::max(1.0, mag());
    return Interval(lo - pad, hi + pad);
  }

  Interval operator+(const Interval& o) const { return Interval(lo + o.lo, hi + o.hi); }
  Interval operator-(const Interval& o) const { return Interval(lo - o.hi, hi - o.lo); }
  Interval operator-() const { return Interval(-hi, -lo); }
  Interval operator*(const Interval& o) const {
    double a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
    return Interval(std::min(std::min(a, b), std::min(c, d)),
                    std::max(std::max(a, b), std::max(c, d)));
  }
  Interval operator*(double s) const {
    return s >= 0 ? Interval(lo * s, hi * s) : Interval(hi * s, lo * s);
  }
  Interval operator+(double s) const { return Interval(lo + s, hi + s); }

  // x^k with correct even-power tightening around 0
  Interval pow(int k) const {
    if (k == 0) return Interval(1.0, 1.0);
    if (k == 1) return *this;
    double pl = std::pow(lo, k), ph = std::pow(hi, k);
    if (k % 2 == 1) return Interval(pl, ph);
    if (lo <= 0.0 && hi >= 0.0) return Interval(0.0, std::max(pl, ph));
    return Interval(std::min(pl, ph), std::max(pl, ph));
  }
};

}  // namespace hesscut
