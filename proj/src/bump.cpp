#include "hesscut/bump.hpp"

#include <algorithm>
#include <cmath>

namespace hesscut {

// ------------------------------------------------------------------- Jet

Jet Jet::operator+(const Jet& o) const {
  Jet r(std::max(order(), o.order()));
  for (size_t k = 0; k < r.c.size(); ++k) {
    if (k < c.size()) r.c[k] += c[k];
    if (k < o.c.size()) r.c[k] += o.c[k];
  }
  return r;
}

Jet Jet::operator-(const Jet& o) const {
  Jet r(std::max(order(), o.order()));
  for (size_t k = 0; k < r.c.size(); ++k) {
    if (k < c.size()) r.c[k] += c[k];
    if (k < o.c.size()) r.c[k] -= o.c[k];
  }
  return r;
}

Jet Jet::operator*(const Jet& o) const {
  int n = std::max(order(), o.order());
  Jet r(n);
  for (int i = 0; i <= order(); ++i) {
    if (c[i] == 0.0) continue;
    int jm = std::min(o.order(), n - i);
    for (int j = 0; j <= jm; ++j) r.c[i + j] += c[i] * o.c[j];
  }
  return r;
}

Jet Jet::operator*(double s) const {
  Jet r = *this;
  for (double& v : r.c) v *= s;
  return r;
}

Jet Jet::operator+(double s) const {
  Jet r = *this;
  r.c[0] += s;
  return r;
}

Jet Jet::recip() const {
  // y = 1/u: y0 = 1/u0, y_k = -(1/u0) * sum_{j=1..k} u_j y_{k-j}
  Jet r(order());
  double inv = 1.0 / c[0];
  r.c[0] = inv;
  for (int k = 1; k <= order(); ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += c[j] * r.c[k - j];
    r.c[k] = -inv * acc;
  }
  return r;
}

Jet Jet::exp() const {
  // y = exp(u): y' = u' y, so (k+1) y_{k+1} = sum_{j=0..k} (j+1) u_{j+1} y_{k-j}
  Jet r(order());
  r.c[0] = std::exp(c[0]);
  for (int k = 0; k < order(); ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += (j + 1) * c[j + 1] * r.c[k - j];
    r.c[k + 1] = acc / (k + 1);
  }
  return r;
}

double Jet::deriv(int k) const {
  if (k > order()) throw ValidationError("Jet::deriv order exceeds jet order");
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f * c[k];
}

// ----------------------------------------------------------------- Bump1

Bump1::Bump1(double radius) : r_(radius) {
  if (!(radius > 0.0)) throw ValidationError("bump radius must be positive");
}

double Bump1::value(double x) const {
  double z = x / r_;
  double u = 1.0 - z * z;
  if (u <= 1e-12) return 0.0;  // at/near the boundary everything underflows to 0
  return std::exp(-1.0 / u);
}

Jet Bump1::jet(double x, int order) const {
  double z = x / r_;
  double u0 = 1.0 - z * z;
  if (u0 <= 1e-12) return Jet(order);  // identically-zero jet outside support
  // u(t) = 1 - ((x+t)/r)^2 as a degree-2 jet, then b = exp(-1/u)
  Jet u(order);
  u.c[0] = u0;
  if (order >= 1) u.c[1] = -2.0 * x / (r_ * r_);
  if (order >= 2) u.c[2] = -1.0 / (r_ * r_);
  return (u.recip() * -1.0).exp();
}

double Bump1::deriv(int k, double x) const {
  if (k == 0) return value(x);
  return jet(x, k).deriv(k);
}

// ----------------------------------------------------------- ProductBump

ProductBump::ProductBump(std::vector<double> radii, std::vector<double> centers, double amp)
    : centers_(std::move(centers)), amp_(amp) {
  if (radii.size() != centers_.size())
    throw ValidationError("product bump: radii/centers arity mismatch");
  for (double r : radii) axes_.emplace_back(r);
}

ProductBump ProductBump::standard(int dim, double radius) {
  return ProductBump(std::vector<double>(dim, radius), std::vector<double>(dim, 0.0), 1.0);
}

double ProductBump::value(const std::vector<double>& x) const {
  if (x.size() != axes_.size())
    throw ValidationError("product bump: point arity mismatch");
  double v = amp_;
  for (size_t i = 0; i < axes_.size(); ++i) {
    v *= axes_[i].value(x[i] - centers_[i]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

double ProductBump::value2(double x1, double x2) const {
  double a = axes_[0].value(x1 - centers_[0]);
  if (a == 0.0) return 0.0;
  return amp_ * a * axes_[1].value(x2 - centers_[1]);
}

double ProductBump::partial(const std::vector<int>& k, const std::vector<double>& x) const {
  if (k.size() != axes_.size() || x.size() != axes_.size())
    throw ValidationError("product bump: partial arity mismatch");
  double v = amp_;
  for (size_t i = 0; i < axes_.size(); ++i) {
    v *= axes_[i].deriv(k[i], x[i] - centers_[i]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

Interval ProductBump::support(int i) const {
  return Interval(centers_[i] - axes_[i].radius(), centers_[i] + axes_[i].radius());
}

// ------------------------------------------------------------------- Chi

double Chi::value(double v) const {
  if (!two_sided_ && v < 0.0) return 0.0;
  double a = std::abs(v);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  double y = 2.0 * a - 3.0;
  double u = 1.0 - y * y;
  if (u <= 1e-12) return 0.0;
  return std::exp(-1.0 / u);
}

double Chi::deriv(int k, double v) const {
  if (k == 0) return value(v);
  if (!two_sided_ && v < 0.0) return 0.0;
  double a = std::abs(v);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  // chi(v) = B(2|v| - 3) with B the unit bump; chain rule gives (+-2)^k B^(k)
  Bump1 unit(1.0);
  double y = 2.0 * a - 3.0;
  double s = v >= 0.0 ? 2.0 : -2.0;
  return std::pow(s, k) * unit.deriv(k, y);
}

std::array<Interval, 2> Chi::bands() const {
  if (two_sided_) return {Interval(-2.0, -1.0), Interval(1.0, 2.0)};
  return {Interval(1.0, 2.0), Interval(1.0, 2.0)};
}

}  // namespace hesscut
