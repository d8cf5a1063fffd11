#pragma once

#include <array>
#include <vector>

#include "hesscut/common.hpp"
#include "hesscut/interval.hpp"

namespace hesscut {

// Truncated power series (Taylor jet) in one variable. Orders are small
// (<= ~16); used to get exact derivatives of the compactly supported
// amplitude and cutoff profiles, where nested finite differences would drown
// in roundoff.
struct Jet {
  std::vector<double> c;  // c[k] = k-th Taylor coefficient at the base point

  explicit Jet(int order) : c(order + 1, 0.0) {}
  int order() const { return static_cast<int>(c.size()) - 1; }

  static Jet constant(double v, int order) {
    Jet j(order);
    j.c[0] = v;
    return j;
  }
  // the increment variable t at base value x0: x0 + t
  static Jet variable(double x0, int order) {
    Jet j(order);
    j.c[0] = x0;
    if (order >= 1) j.c[1] = 1.0;
    return j;
  }

  Jet operator+(const Jet& o) const;
  Jet operator-(const Jet& o) const;
  Jet operator*(const Jet& o) const;  // truncated convolution
  Jet operator*(double s) const;
  Jet operator+(double s) const;
  Jet recip() const;  // 1/series, requires c[0] != 0
  Jet exp() const;    // exp(series)

  // value of the k-th derivative: k! * c[k]
  double deriv(int k) const;
};

// One-dimensional bump b(x) = exp(-1 / (1 - (x/r)^2)) on |x| < r, zero
// outside. All derivatives vanish at the boundary.
class Bump1 {
 public:
  explicit Bump1(double radius = 0.5);
  double radius() const { return r_; }
  double value(double x) const;
  double deriv(int k, double x) const;
  Jet jet(double x, int order) const;

 private:
  double r_;
};

// Product bump psi(x) = amp * prod_i b_{r_i}(x_i - c_i). The default
// amplitude for all integral operators.
class ProductBump {
 public:
  ProductBump() = default;
  ProductBump(std::vector<double> radii, std::vector<double> centers, double amp = 1.0);
  static ProductBump standard(int dim, double radius = 0.5);

  int dim() const { return static_cast<int>(axes_.size()); }
  double amp() const { return amp_; }
  const Bump1& axis(int i) const { return axes_[i]; }
  double center(int i) const { return centers_[i]; }

  double value(const std::vector<double>& x) const;
  double value2(double x1, double x2) const;  // dim()==2 fast path
  // exact mixed partial d^{k}/dx^{k} psi via per-axis jets
  double partial(const std::vector<int>& k, const std::vector<double>& x) const;
  // support box of axis i: [c_i - r_i, c_i + r_i]
  Interval support(int i) const;

 private:
  std::vector<Bump1> axes_;
  std::vector<double> centers_;
  double amp_ = 1.0;
};

// Hessian-determinant cutoff chi(v): a bump supported on 1 < |v| < 2,
// chi(v) = exp(-1 / (1 - (2|v| - 3)^2)) there. With two_sided=false only the
// positive component [1,2] is kept.
class Chi {
 public:
  explicit Chi(bool two_sided = true) : two_sided_(two_sided) {}
  bool two_sided() const { return two_sided_; }
  double value(double v) const;
  double deriv(int k, double v) const;
  // the active v-intervals (union of at most two)
  std::array<Interval, 2> bands() const;
  int n_bands() const { return two_sided_ ? 2 : 1; }

 private:
  bool two_sided_;
};

}  // namespace hesscut
