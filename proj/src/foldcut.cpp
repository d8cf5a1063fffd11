#include "hesscut/foldcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hesscut {

namespace {

// Flattened evaluation tables for the continuation system
//   F(x; s) = (cross(grad(Phi + xi.x), grad u), u - s).
// The cross product is linear in xi, so only the xi-free part and the
// gradients of u enter; everything else is precomputed once per call.
struct FoldSystem {
  FlatPoly2 phi;                 // Phi (without the linear tilt)
  FlatPoly2 g1, g2;              // grad Phi
  FlatPoly2 u;                   // cutoff argument
  FlatPoly2 u1, u2;              // grad u
  FlatPoly2 h11, h12, h22;       // Hess Phi (= Hess Phi_xi)
  FlatPoly2 v11, v12, v22;       // Hess u
  FlatPoly2 cr, crx, cry;        // xi-free cross term and its gradient
  double xi1 = 0.0, xi2 = 0.0;

  double cross(double x, double y) const {
    return cr(x, y) + xi1 * u2(x, y) - xi2 * u1(x, y);
  }
  void cross_grad(double x, double y, double& gx, double& gy) const {
    gx = crx(x, y) + xi1 * v12(x, y) - xi2 * v11(x, y);
    gy = cry(x, y) + xi1 * v22(x, y) - xi2 * v12(x, y);
  }
  double phi_xi(double x, double y) const {
    return phi(x, y) + xi1 * x + xi2 * y;
  }
  void grad_phi_xi(double x, double y, double& gx, double& gy) const {
    gx = g1(x, y) + xi1;
    gy = g2(x, y) + xi2;
  }
  // residual scales: the cross product is compared against the product of the
  // gradient magnitudes, the level equation against the parameter size
  double cross_scale(double x, double y) const {
    double px, py;
    grad_phi_xi(x, y, px, py);
    return 1.0 + std::hypot(px, py) * std::hypot(u1(x, y), u2(x, y));
  }
  static double level_scale(double s) { return 1.0 + std::abs(s); }
};

FoldSystem build_system(const PolyPhase& phi, const std::vector<double>& xi,
                        const PolyPhase& u) {
  if (phi.dim() != 2 || u.dim() != 2)
    throw ValidationError("fold-curve reduction is implemented for two variables");
  if (xi.size() != 2)
    throw ValidationError("frequency offset must have two components");
  FoldSystem sys;
  PolyPhase p1 = phi.partial(0), p2 = phi.partial(1);
  PolyPhase q1 = u.partial(0), q2 = u.partial(1);
  PolyPhase cr = p1 * q2 - p2 * q1;
  sys.phi = flatten2(phi);
  sys.g1 = flatten2(p1);
  sys.g2 = flatten2(p2);
  sys.u = flatten2(u);
  sys.u1 = flatten2(q1);
  sys.u2 = flatten2(q2);
  sys.h11 = flatten2(p1.partial(0));
  sys.h12 = flatten2(p1.partial(1));
  sys.h22 = flatten2(p2.partial(1));
  sys.v11 = flatten2(q1.partial(0));
  sys.v12 = flatten2(q1.partial(1));
  sys.v22 = flatten2(q2.partial(1));
  sys.cr = flatten2(cr);
  sys.crx = flatten2(cr.partial(0));
  sys.cry = flatten2(cr.partial(1));
  sys.xi1 = xi[0];
  sys.xi2 = xi[1];
  return sys;
}

constexpr double kNewtonTol = 1e-12;  // scaled residual target (invariant 1e-10)
constexpr double kRankTol = 1e-10;    // relative Jacobian-determinant floor

double scaled_residual(const FoldSystem& sys, double s, double x, double y) {
  double rg = sys.cross(x, y) / sys.cross_scale(x, y);
  double ru = (sys.u(x, y) - s) / FoldSystem::level_scale(s);
  return std::hypot(rg, ru);
}

// Damped Newton corrector for F(x; s) = 0. Returns false on stagnation or a
// singular Jacobian; the caller decides whether that is an error.
bool newton2(const FoldSystem& sys, double s, double& x, double& y,
             int max_iter = 60) {
  double res = scaled_residual(sys, s, x, y);
  for (int iter = 0; iter < max_iter; ++iter) {
    if (res <= kNewtonTol) return true;
    double gx, gy;
    sys.cross_grad(x, y, gx, gy);
    double ux = sys.u1(x, y), uy = sys.u2(x, y);
    double det = gx * uy - gy * ux;
    double jscale = std::hypot(gx, gy) * std::hypot(ux, uy) + 1e-300;
    if (std::abs(det) < 1e-14 * jscale) return false;
    double f1 = sys.cross(x, y), f2 = sys.u(x, y) - s;
    double dx = (uy * f1 - gy * f2) / det;
    double dy = (-ux * f1 + gx * f2) / det;
    // backtracking line search on the scaled residual
    double alpha = 1.0;
    bool moved = false;
    for (int half = 0; half < 10; ++half, alpha *= 0.5) {
      double xn = x - alpha * dx, yn = y - alpha * dy;
      double rn = scaled_residual(sys, s, xn, yn);
      if (rn < res) {
        x = xn;
        y = yn;
        res = rn;
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return res <= kNewtonTol;
}

std::string point_str(double s, double x, double y) {
  std::ostringstream os;
  os << "s=" << s << " near (" << x << ", " << y << ")";
  return os.str();
}

// Assemble a FoldSample at a converged point, checking the rank of the
// continuation system and the nondegeneracy of the restricted Hessian.
FoldSample make_sample(const FoldSystem& sys, double s, double x, double y) {
  double gx, gy;
  sys.cross_grad(x, y, gx, gy);
  double ux = sys.u1(x, y), uy = sys.u2(x, y);
  double det = gx * uy - gy * ux;
  double jscale = std::hypot(gx, gy) * std::hypot(ux, uy) + 1e-300;
  if (std::abs(det) < kRankTol * jscale)
    throw ValidationError("continuation system is rank-deficient at " +
                          point_str(s, x, y));
  FoldSample smp;
  smp.s = s;
  smp.x1 = x;
  smp.x2 = y;
  // tangent: J (dgamma/ds) = (0, 1)
  smp.t1 = -gy / det;
  smp.t2 = gx / det;
  smp.f = sys.phi_xi(x, y);
  double px, py;
  sys.grad_phi_xi(x, y, px, py);
  smp.fprime = px * smp.t1 + py * smp.t2;
  // unit tangent X1 of the level set {u = s}
  double gnorm = std::hypot(ux, uy);
  if (gnorm < 1e-300)
    throw ValidationError("cutoff gradient vanishes at " + point_str(s, x, y));
  double e1 = -uy / gnorm, e2 = ux / gnorm;
  // M = Hess Phi - f'(s) Hess u, restricted to X1
  double m11 = sys.h11(x, y) - smp.fprime * sys.v11(x, y);
  double m12 = sys.h12(x, y) - smp.fprime * sys.v12(x, y);
  double m22 = sys.h22(x, y) - smp.fprime * sys.v22(x, y);
  smp.restricted = m11 * e1 * e1 + 2.0 * m12 * e1 * e2 + m22 * e2 * e2;
  double mscale = std::abs(m11) + 2.0 * std::abs(m12) + std::abs(m22) + 1e-300;
  if (std::abs(smp.restricted) < kRankTol * mscale)
    throw ValidationError("restricted Hessian degenerates at " +
                          point_str(s, x, y));
  // coarea density |det(gamma', X1)| / sqrt|M(X1, X1)|
  double mu = smp.t1 * e2 - smp.t2 * e1;
  smp.density = std::abs(mu) / std::sqrt(std::abs(smp.restricted));
  return smp;
}

bool in_window(const Window2& w, double x, double y) {
  double pad1 = 1e-9 * (1.0 + w.x1.width());
  double pad2 = 1e-9 * (1.0 + w.x2.width());
  return x >= w.x1.lo - pad1 && x <= w.x1.hi + pad1 && y >= w.x2.lo - pad2 &&
         y <= w.x2.hi + pad2;
}

// March outward from a converged seed over the uniform parameter grid.
FoldCurve trace_branch(const FoldSystem& sys, const Window2& window,
                       const std::vector<double>& sgrid, int i0, double x0,
                       double y0) {
  FoldCurve curve;
  std::vector<FoldSample> up, down;
  for (int dir = 0; dir < 2; ++dir) {
    double x = x0, y = y0;
    bool have_tangent = false;
    double t1 = 0.0, t2 = 0.0, sprev = sgrid[i0];
    int begin = (dir == 0) ? i0 : i0 - 1;
    int step = (dir == 0) ? 1 : -1;
    for (int j = begin; j >= 0 && j < static_cast<int>(sgrid.size());
         j += step) {
      double starget = sgrid[j];
      double xs = x, ys = y;
      if (have_tangent) {  // predictor along the previous tangent
        xs += t1 * (starget - sprev);
        ys += t2 * (starget - sprev);
      }
      if (!newton2(sys, starget, xs, ys)) {
        curve.truncated = true;
        curve.diagnostic =
            "corrector failed at " + point_str(starget, xs, ys);
        break;
      }
      if (!in_window(window, xs, ys)) {
        curve.truncated = true;
        curve.diagnostic = "curve left the window at " + point_str(starget, xs, ys);
        break;
      }
      FoldSample smp = make_sample(sys, starget, xs, ys);
      (dir == 0 ? up : down).push_back(smp);
      x = xs;
      y = ys;
      t1 = smp.t1;
      t2 = smp.t2;
      sprev = starget;
      have_tangent = true;
    }
  }
  curve.samples.assign(down.rbegin(), down.rend());
  curve.samples.insert(curve.samples.end(), up.begin(), up.end());
  if (curve.samples.empty()) return curve;
  curve.omega = curve.samples.front().restricted > 0.0 ? 1 : -1;
  for (const FoldSample& smp : curve.samples) {
    int sgn = smp.restricted > 0.0 ? 1 : -1;
    if (sgn != curve.omega)
      throw ValidationError(
          "restricted signature changes along the curve at " +
          point_str(smp.s, smp.x1, smp.x2));
  }
  return curve;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

}  // namespace

std::vector<FoldCurve> trace_all_branches(const PolyPhase& phi,
                                          const std::vector<double>& xi,
                                          const PolyPhase& u,
                                          const Window2& window, double s_lo,
                                          double s_hi, int n_samples) {
  if (!(s_hi > s_lo))
    throw ValidationError("parameter range must satisfy s_lo < s_hi");
  if (n_samples < 2) throw ValidationError("need at least two curve samples");
  if (!(window.x1.hi > window.x1.lo) || !(window.x2.hi > window.x2.lo))
    throw ValidationError("tracing window is empty");
  FoldSystem sys = build_system(phi, xi, u);
  std::vector<double> sgrid = uniform_grid(s_lo, s_hi, n_samples);
  int i0 = n_samples / 2;
  double smid = sgrid[i0];
  double wscale =
      std::max({window.x1.width(), window.x2.width(), 1.0});

  // grid search for corrector seeds at the mid-range parameter value
  constexpr int kGrid = 41;
  std::vector<std::pair<double, double>> found;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      double x = window.x1.lo + window.x1.width() * i / (kGrid - 1);
      double y = window.x2.lo + window.x2.width() * j / (kGrid - 1);
      if (!newton2(sys, smid, x, y)) continue;
      if (!in_window(window, x, y)) continue;
      bool dup = false;
      for (const auto& [px, py] : found)
        if (std::hypot(x - px, y - py) <= 1e-6 * wscale) {
          dup = true;
          break;
        }
      if (!dup) found.emplace_back(x, y);
    }
  }
  std::sort(found.begin(), found.end());

  std::vector<FoldCurve> curves;
  for (const auto& [x, y] : found) {
    make_sample(sys, smid, x, y);  // surface rank/degeneracy problems early
    FoldCurve curve = trace_branch(sys, window, sgrid, i0, x, y);
    if (!curve.samples.empty()) curves.push_back(std::move(curve));
  }
  return curves;
}

FoldCurve trace_curve(const PolyPhase& phi, const std::vector<double>& xi,
                      const PolyPhase& u, const Window2& window, double s_lo,
                      double s_hi, int n_samples) {
  std::vector<FoldCurve> curves =
      trace_all_branches(phi, xi, u, window, s_lo, s_hi, n_samples);
  if (curves.empty())
    throw ValidationError("no fold curve meets the window over the parameter range");
  double cx = 0.5 * (window.x1.lo + window.x1.hi);
  double cy = 0.5 * (window.x2.lo + window.x2.hi);
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < curves.size(); ++k) {
    double d = std::numeric_limits<double>::infinity();
    for (const FoldSample& smp : curves[k].samples)
      d = std::min(d, std::hypot(smp.x1 - cx, smp.x2 - cy));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return curves[best];
}

std::vector<double> curve_density(const PolyPhase& phi,
                                  const std::vector<double>& xi,
                                  const PolyPhase& u, FoldCurve& curve) {
  FoldSystem sys = build_system(phi, xi, u);
  std::vector<double> out;
  out.reserve(curve.samples.size());
  for (FoldSample& smp : curve.samples) {
    double x = smp.x1, y = smp.x2;
    if (!newton2(sys, smp.s, x, y))
      throw NumericError("could not re-converge the curve at " +
                         point_str(smp.s, x, y));
    smp = make_sample(sys, smp.s, x, y);
    out.push_back(smp.density);
  }
  return out;
}

namespace {

FoldSample solve_at(const FoldSystem& sys, const FoldCurve& curve, double s) {
  if (curve.samples.empty())
    throw ValidationError("curve has no samples to continue from");
  // warm start from the nearest stored sample
  const std::vector<FoldSample>& sm = curve.samples;
  auto it = std::lower_bound(
      sm.begin(), sm.end(), s,
      [](const FoldSample& a, double v) { return a.s < v; });
  if (it == sm.end()) --it;
  if (it != sm.begin() && std::abs(std::prev(it)->s - s) < std::abs(it->s - s))
    --it;
  double x = it->x1 + it->t1 * (s - it->s);
  double y = it->x2 + it->t2 * (s - it->s);
  if (!newton2(sys, s, x, y))
    throw NumericError("could not continue the curve to " +
                       point_str(s, x, y));
  return make_sample(sys, s, x, y);
}

}  // namespace

FoldSample point_at(const PolyPhase& phi, const std::vector<double>& xi,
                    const PolyPhase& u, const FoldCurve& curve, double s) {
  FoldSystem sys = build_system(phi, xi, u);
  return solve_at(sys, curve, s);
}

double reduced_f2(const PolyPhase& phi, const std::vector<double>& xi,
                  const PolyPhase& u, const FoldCurve& curve, double s) {
  FoldSystem sys = build_system(phi, xi, u);
  FoldSample smp = solve_at(sys, curve, s);
  double x = smp.x1, y = smp.x2;
  double m11 = sys.h11(x, y) - smp.fprime * sys.v11(x, y);
  double m12 = sys.h12(x, y) - smp.fprime * sys.v12(x, y);
  double m22 = sys.h22(x, y) - smp.fprime * sys.v22(x, y);
  double detm = m11 * m22 - m12 * m12;
  double sgn = smp.restricted > 0.0 ? 1.0 : -1.0;
  return sgn * detm * smp.density * smp.density;
}

Complex reduced_expansion0(const PolyPhase& phi, const std::vector<double>& xi,
                           const PolyPhase& u, const Chi& chi, double eps,
                           const ProductBump& psi, double t,
                           const Window2& window, const QuadConfig& cfg) {
  if (!(eps > 0.0)) throw ValidationError("cutoff scale must be positive");
  if (!(t > 0.0)) throw ValidationError("time parameter must be positive");
  FoldSystem sys = build_system(phi, xi, u);
  Complex total(0.0, 0.0);
  const std::array<Interval, 2> bands = chi.bands();
  for (int bi = 0; bi < chi.n_bands(); ++bi) {
    const Interval& band = bands[bi];
    double b_lo = band.lo * eps, b_hi = band.hi * eps;
    std::vector<FoldCurve> curves =
        trace_all_branches(phi, xi, u, window, b_lo, b_hi, 33);
    for (const FoldCurve& curve : curves) {
      if (curve.truncated)
        throw NumericError("curve incomplete over a cutoff band: " +
                           curve.diagnostic);
      Osc1DSpec spec;
      spec.a = b_lo;
      spec.b = b_hi;
      spec.t = t;
      spec.f = [&sys, &curve](double s) { return solve_at(sys, curve, s).f; };
      spec.fprime = [&sys, &curve](double s) {
        return solve_at(sys, curve, s).fprime;
      };
      spec.w = [&sys, &curve, &chi, &psi, eps](double s) {
        FoldSample smp = solve_at(sys, curve, s);
        return chi.value(s / eps) * psi.value({smp.x1, smp.x2}) * smp.density;
      };
      IntegralValue iv = osc1d(spec, cfg);
      total += std::sqrt(2.0 * M_PI) *
               std::exp(Complex(0.0, M_PI * curve.omega / 4.0)) * iv.value;
    }
  }
  return total;
}

}  // namespace hesscut
