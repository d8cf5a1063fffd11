#include "hesscut/decayscan.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hesscut/common.hpp"

namespace hesscut {

namespace {

std::vector<double> linspace(const Interval& I, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = I.lo + (I.hi - I.lo) * i / (n - 1);
  return out;
}

Rational pow2q(long e) {
  mpz_class one = 1;
  if (e >= 0) return Rational(one << static_cast<unsigned long>(e));
  return Rational(one, one << static_cast<unsigned long>(-e));
}

PolyPhase counterexample_phase() {
  PolyPhase p(2);
  p.add_term({0, 2}, 1);
  p.add_term({2, 1}, 2);
  p.add_term({4, 0}, 1);
  return p;
}

double raw_annulus(double w) {
  double z = (w - 1.25) / 0.75;
  double d = 1.0 - z * z;
  return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

}  // namespace

double annulus_eta(double v) {
  if (!(v > 0.0)) return 0.0;
  double num = raw_annulus(v);
  if (num == 0.0) return 0.0;
  // the dyadic-orbit sum is invariant under v -> 2^k v, so normalizing by it
  // makes sum_k annulus_eta(2^k v) telescope to 1 exactly
  int k0 = static_cast<int>(std::floor(-std::log2(v))) - 2;
  double den = 0.0;
  for (int k = k0; k <= k0 + 4; ++k) den += raw_annulus(std::ldexp(v, k));
  return num / den;
}

XiBox default_xi_box(const PolyPhase& phi, const ProductBump& psi,
                     double margin) {
  if (phi.dim() != 2) throw ValidationError("xi box: phase must have 2 variables");
  if (psi.dim() != 2) throw ValidationError("xi box: amplitude must have 2 variables");
  if (!(margin >= 0.0)) throw ValidationError("xi box: margin must be >= 0");
  PolyPhase g1 = phi.partial(0), g2 = phi.partial(1);
  FlatPoly2 f1 = flatten2(g1), f2 = flatten2(g2);
  Interval s1 = psi.support(0), s2 = psi.support(1);
  Interval r1 = f1.bound(s1, s2), r2 = f2.bound(s1, s2);
  return {Interval(-r1.hi - margin, -r1.lo + margin),
          Interval(-r2.hi - margin, -r2.lo + margin)};
}

ScanRecord sup_over_xi(const PolyPhase& phi, double lambda, double eps,
                       const Chi& chi, const ProductBump& psi, const XiBox& box,
                       const ScanConfig& cfg) {
  if (phi.dim() != 2) throw ValidationError("scan: phase must have 2 variables");
  if (!(lambda > 0.0)) throw ValidationError("scan: lambda must be positive");
  if (!(eps > 0.0)) throw ValidationError("scan: eps must be positive");
  if (cfg.coarse < 2 || cfg.refine < 2)
    throw ValidationError("scan: grids need at least 2 points per axis");
  if (cfg.passes < 0) throw ValidationError("scan: passes must be >= 0");
  if (!(box.xi1.width() > 0.0) || !(box.xi2.width() > 0.0))
    throw ValidationError("scan: xi box is empty");

  PolyPhase u = phi.hessian_det();
  Osc2DSpec base = make_osc2d(phi, lambda, 0.0, 0.0, &chi, &u, eps, &psi);

  ScanRecord rec;
  rec.lambda = lambda;
  rec.eps = eps;
  long nodes_total = 0;

  Interval bx = box.xi1, by = box.xi2;
  double best1 = 0.5 * (bx.lo + bx.hi), best2 = 0.5 * (by.lo + by.hi);
  int n = cfg.coarse;
  for (int pass = 0; pass <= cfg.passes; ++pass) {
    std::vector<double> xs = linspace(bx, n), ys = linspace(by, n);
    long nd = 0;
    std::vector<Complex> vals = osc2d_xi_grid(base, xs, ys, cfg.quad, &nd);
    nodes_total += nd;
    double best = -1.0;
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t j = 0; j < ys.size(); ++j) {
        double a = std::abs(vals[i * ys.size() + j]);
        if (a > best) {
          best = a;
          best1 = xs[i];
          best2 = ys[j];
        }
      }
    double hx = bx.width() / (n - 1), hy = by.width() / (n - 1);
    bx = Interval(best1 - hx, best1 + hx);
    by = Interval(best2 - hy, best2 + hy);
    n = cfg.refine;
  }

  Osc2DSpec at = base;
  at.xi1 = best1;
  at.xi2 = best2;
  IntegralValue va = osc2d(at, cfg.quad);
  IntegralValue v0 = osc2d(base, cfg.quad);
  nodes_total += va.nodes + v0.nodes;
  rec.val_at_zero = std::abs(v0.value);
  // ties (including an identically vanishing cutoff) report the zero tilt
  if (rec.val_at_zero >= std::abs(va.value)) {
    rec.xi_star = {0.0, 0.0};
    rec.sup_val = rec.val_at_zero;
    rec.est_error = v0.est_error;
  } else {
    rec.xi_star = {best1, best2};
    rec.sup_val = std::abs(va.value);
    rec.est_error = va.est_error;
  }
  rec.nodes_used = nodes_total;
  return rec;
}

std::vector<ScanRecord> scan_grid(const PolyPhase& phi,
                                  const std::vector<double>& lambdas,
                                  const std::vector<double>& epss,
                                  const Chi& chi, const ProductBump& psi,
                                  const XiBox& box, const ScanConfig& cfg) {
  if (lambdas.empty() || epss.empty())
    throw ValidationError("scan: empty lambda or eps grid");
  std::vector<ScanRecord> out;
  out.reserve(lambdas.size() * epss.size());
  for (double lam : lambdas)
    for (double ep : epss)
      out.push_back(sup_over_xi(phi, lam, ep, chi, psi, box, cfg));
  return out;
}

FitResult fit_decay(const std::vector<ScanRecord>& records, int s_hint) {
  if (s_hint != 0 && s_hint != 1)
    throw ValidationError("fit: s_hint must be 0 or 1");
  std::vector<double> ls, es;
  for (const ScanRecord& r : records) {
    if (!(r.sup_val > 0.0))
      throw ValidationError("fit: nonpositive sup value has no logarithm");
    ls.push_back(r.lambda);
    es.push_back(r.eps);
  }
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<double> dl = distinct(ls), de = distinct(es);
  if (dl.size() < 6 || de.size() < 6)
    throw ValidationError("fit: need >= 6 distinct values per axis");
  if (dl.back() < 4.0 * dl.front() || de.back() < 4.0 * de.front())
    throw ValidationError("fit: need >= 2 dyadic decades per axis");

  const int N = static_cast<int>(records.size());
  Eigen::MatrixXd X(N, 3);
  Eigen::VectorXd y(N);
  for (int i = 0; i < N; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(records[i].lambda);
    X(i, 2) = std::log(records[i].eps);
    y(i) = std::log(records[i].sup_val);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < 3) throw ValidationError("fit: ill-conditioned design matrix");
  Eigen::Vector3d beta = qr.solve(y);
  Eigen::VectorXd resid = y - X * beta;
  FitResult fit;
  fit.s_hint = s_hint;
  fit.rho_lambda = beta(1);
  fit.rho_eps = beta(2);
  fit.rms_power = std::sqrt(resid.squaredNorm() / N);
  double sigma2 = resid.squaredNorm() / std::max(1, N - 3);
  Eigen::Matrix3d cov = sigma2 * (X.transpose() * X).inverse();
  fit.se_lambda = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.se_eps = std::sqrt(std::max(0.0, cov(2, 2)));

  // compensated quantity z = sup * lambda * sqrt(eps) against log(1/eps)
  Eigen::MatrixXd Z(N, 2);
  Eigen::VectorXd z(N);
  double zmin = std::numeric_limits<double>::infinity(), zmax = 0.0;
  for (int i = 0; i < N; ++i) {
    double zi = records[i].sup_val * records[i].lambda * std::sqrt(records[i].eps);
    Z(i, 0) = 1.0;
    Z(i, 1) = std::log(1.0 / records[i].eps);
    z(i) = zi;
    zmin = std::min(zmin, zi);
    zmax = std::max(zmax, zi);
  }
  fit.comp_ratio = zmax / zmin;
  Eigen::Vector2d bz = (Z.transpose() * Z).ldlt().solve(Z.transpose() * z);
  Eigen::VectorXd rz = z - Z * bz;
  fit.log_slope = bz(1);
  fit.rms_comp_log = std::sqrt(rz.squaredNorm() / N);
  double mean = z.mean();
  fit.rms_comp_const = std::sqrt((z.array() - mean).square().sum() / N);
  double sz2 = rz.squaredNorm() / std::max(1, N - 2);
  Eigen::Matrix2d covz = sz2 * (Z.transpose() * Z).inverse();
  fit.log_slope_se = std::sqrt(std::max(0.0, covz(1, 1)));
  fit.log_slope_tstat =
      fit.log_slope_se > 0.0 ? fit.log_slope / fit.log_slope_se : 0.0;
  return fit;
}

ProfileResult counterexample_profile(const std::vector<double>& lambdas,
                                     const Chi& chi, const ProductBump& psi,
                                     const QuadConfig& cfg) {
  if (lambdas.size() < 2)
    throw ValidationError("profile: need at least 2 lambda values");
  for (double l : lambdas)
    if (!(l > 0.0)) throw ValidationError("profile: lambda must be positive");
  if (psi.dim() != 2)
    throw ValidationError("profile: amplitude must have 2 variables");

  PolyPhase phi = counterexample_phase();
  PolyPhase u = phi.hessian_det();  // 8 (x2 + x1^2)
  ProfileResult res;
  for (double lam : lambdas) {
    double eps = 1.0 / std::sqrt(lam);
    Osc2DSpec s = make_osc2d(phi, lam, 0.0, 0.0, &chi, &u, eps, &psi);
    IntegralValue v = osc2d(s, cfg);
    res.rows.push_back({lam, eps, std::abs(v.value),
                        std::abs(v.value) * std::sqrt(lam)});
  }

  // limit factors by 1-D quadrature
  Complex fchi{};
  for (int bi = 0; bi < chi.n_bands(); ++bi) {
    Interval band = chi.bands()[bi];
    Osc1DSpec o;
    o.f = [](double y) { return y * y; };
    o.fprime = [](double y) { return 2.0 * y; };
    o.w = [&chi](double y) { return chi.value(8.0 * y); };
    o.a = band.lo / 8.0;
    o.b = band.hi / 8.0;
    o.t = 1.0;
    fchi += osc1d(o, cfg).value;
  }
  res.factor_chi = std::abs(fchi);
  Interval sup1 = psi.support(0);
  res.factor_psi = integrate1d(
      [&psi](double x1) { return psi.value2(x1, -x1 * x1); }, sup1.lo, sup1.hi,
      cfg);
  res.target = res.factor_chi * res.factor_psi;

  // LS slope of log |I| against log lambda
  const int N = static_cast<int>(res.rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const ProfileRow& r : res.rows) {
    if (!(r.absval > 0.0))
      throw ValidationError("profile: vanishing integral in the fit");
    double x = std::log(r.lambda), yv = std::log(r.absval);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  res.fitted_exponent = (N * sxy - sx * sy) / (N * sxx - sx * sx);
  return res;
}

double counterexample_substitution_diff(double lambda, const Chi& chi,
                                        const ProductBump& psi,
                                        const QuadConfig& cfg) {
  if (!(lambda > 0.0)) throw ValidationError("substitution: lambda must be positive");
  if (psi.dim() != 2)
    throw ValidationError("substitution: amplitude must have 2 variables");
  PolyPhase phi = counterexample_phase();
  PolyPhase u = phi.hessian_det();
  double eps = 1.0 / std::sqrt(lambda);
  Osc2DSpec L = make_osc2d(phi, lambda, 0.0, 0.0, &chi, &u, eps, &psi);
  IntegralValue vl = osc2d(L, cfg);

  // substituted side: phase y^2 at unit frequency, cutoff and amplitude
  // folded into the weight
  PolyPhase q(2);
  q.add_term({0, 2}, 1);
  Osc2DSpec R = make_osc2d(q, 1.0, 0.0, 0.0, nullptr, nullptr, 0.0, nullptr);
  double rootlam = std::sqrt(lambda);
  R.extra_amp = [&chi, &psi, rootlam](double x1, double y) {
    return chi.value(8.0 * y) * psi.value2(x1, y / rootlam - x1 * x1);
  };
  R.extra_amp_scale = 1.0 / 16.0;
  R.dom1 = psi.support(0);
  double ylo = chi.bands()[0].lo, yhi = chi.bands()[0].hi;
  for (int bi = 1; bi < chi.n_bands(); ++bi) {
    ylo = std::min(ylo, chi.bands()[bi].lo);
    yhi = std::max(yhi, chi.bands()[bi].hi);
  }
  R.dom2 = Interval(ylo / 8.0, yhi / 8.0);
  IntegralValue vr = osc2d(R, cfg);
  Complex rhs = vr.value / rootlam;
  double denom = std::max(std::abs(vl.value), std::abs(rhs));
  if (denom < 1e-300) return 0.0;
  return std::abs(vl.value - rhs) / denom;
}

namespace {

long min_weight(const std::vector<Exponent>& support, int j1, int j2) {
  long m = std::numeric_limits<long>::max();
  for (const Exponent& e : support)
    m = std::min(m, static_cast<long>(e[0]) * j1 + static_cast<long>(e[1]) * j2);
  return m;
}

}  // namespace

std::vector<BoxClass> classify_boxes(const PolyPhase& phi,
                                     const NewtonPolygon& g, double eps,
                                     const Chi& chi, double c_edge, int j_max) {
  if (phi.dim() != 2)
    throw ValidationError("boxes: phase must have 2 variables");
  if (phi.is_zero()) throw ValidationError("boxes: zero phase");
  if (!(eps > 0.0)) throw ValidationError("boxes: eps must be positive");
  if (!(c_edge >= 0.0)) throw ValidationError("boxes: C_edge must be >= 0");
  if (j_max < 1 || j_max > 40)
    throw ValidationError("boxes: j_max must lie in [1, 40]");

  const std::vector<Exponent> support = phi.support();
  std::vector<EdgeData> edges = edge_data(phi, g);
  PolyPhase u = phi.hessian_det();
  FlatPoly2 uf = flatten2(u);

  // coefficient magnitudes once
  std::vector<double> absc(support.size());
  for (size_t i = 0; i < support.size(); ++i)
    absc[i] = std::abs(phi.coeff(support[i]).get_d());

  std::vector<BoxClass> out;
  out.reserve(static_cast<size_t>(j_max + 1) * (j_max + 1));
  for (int j1 = 0; j1 <= j_max; ++j1)
    for (int j2 = 0; j2 <= j_max; ++j2) {
      BoxClass b;
      b.j = {j1, j2};
      b.m = min_weight(support, j1, j2);
      b.band = std::ldexp(1.0, static_cast<int>(-2 * (b.m - j1 - j2)));

      // vertex dominance: term-wise sup bound on the annulus [1/2,2]^2
      double best_rel = std::numeric_limits<double>::infinity();
      Vec2i best_alpha{};
      for (const Vec2i& a : g.vertices) {
        long adot = static_cast<long>(a.k1) * j1 + static_cast<long>(a.k2) * j2;
        double denom = 0.0, num = 0.0;
        for (size_t i = 0; i < support.size(); ++i) {
          const Exponent& e = support[i];
          long edot = static_cast<long>(e[0]) * j1 + static_cast<long>(e[1]) * j2;
          double sup_term =
              std::ldexp(absc[i], static_cast<int>(adot - edot + e[0] + e[1]));
          if (e[0] == a.k1 && e[1] == a.k2)
            denom = sup_term;
          else
            num += sup_term;
        }
        if (denom == 0.0) continue;  // vertex exponent not in the support
        double rel = num / denom;
        if (rel < best_rel) {
          best_rel = rel;
          best_alpha = a;
        }
      }
      b.rel_remainder = best_rel;

      std::ostringstream desc;
      if (best_rel < 0.1) {
        b.kind = BoxKind::Vertex;
        b.alpha = best_alpha;
        desc << "vertex (" << best_alpha.k1 << "," << best_alpha.k2 << ")";
      } else {
        for (size_t l = 0; l < edges.size(); ++l) {
          double beta = std::sqrt(edges[l].beta_sq.get_d());
          double s = j1 / beta - beta * j2;
          bool in_band;
          if (edges[l].touches_axis1 && edges[l].touches_axis2)
            in_band = true;
          else if (edges[l].touches_axis1)
            in_band = s <= c_edge;
          else if (edges[l].touches_axis2)
            in_band = s >= -c_edge;
          else
            in_band = std::abs(s) <= c_edge;
          if (in_band) {
            b.kind = BoxKind::Edge;
            b.edge_index = static_cast<int>(l);
            desc << "edge " << l << " (beta^2 = " << edges[l].beta_sq.get_d()
                 << ")";
            break;
          }
        }
        if (b.kind == BoxKind::Negligible) desc << "negligible";
      }

      // activity: the cutoff bands meet the u-range over the box ring,
      // checked per sign-quadrant (a joint hull would bridge the gap between
      // disjoint positive and negative ranges)
      Interval xp(std::ldexp(1.0, -j1 - 1), std::ldexp(1.0, -j1 + 1));
      Interval yp(std::ldexp(1.0, -j2 - 1), std::ldexp(1.0, -j2 + 1));
      Interval xn(-xp.hi, -xp.lo), yn(-yp.hi, -yp.lo);
      b.active = false;
      for (const auto& [X, Y] :
           {std::pair{xp, yp}, std::pair{xp, yn}, std::pair{xn, yp},
            std::pair{xn, yn}}) {
        Interval q = uf.bound(X, Y);
        if (q.intersects(Interval(eps, 2.0 * eps)) ||
            (chi.two_sided() && q.intersects(Interval(-2.0 * eps, -eps)))) {
          b.active = true;
          break;
        }
      }
      desc << ", band 2^" << static_cast<int>(-2 * (b.m - j1 - j2))
           << (b.active ? ", active" : "");
      b.descriptor = desc.str();
      out.push_back(std::move(b));
    }
  return out;
}

ActiveCount count_active(const std::vector<BoxClass>& boxes) {
  ActiveCount c;
  for (const BoxClass& b : boxes) {
    if (!b.active) continue;
    switch (b.kind) {
      case BoxKind::Vertex: ++c.vertex; break;
      case BoxKind::Edge: ++c.edge; break;
      case BoxKind::Negligible: ++c.negligible; break;
    }
  }
  return c;
}

RescaleReport rescale_check(const PolyPhase& phi, const BoxClass& box,
                            const std::array<double, 2>& xi, double lambda,
                            double eps, const Chi& chi, const ProductBump& psi,
                            const QuadConfig& cfg) {
  if (phi.dim() != 2)
    throw ValidationError("rescale: phase must have 2 variables");
  if (!(lambda > 0.0) || !(eps > 0.0))
    throw ValidationError("rescale: lambda and eps must be positive");
  const int j1 = box.j[0], j2 = box.j[1];
  if (j1 < 0 || j2 < 0) throw ValidationError("rescale: box indices must be >= 0");

  RescaleReport rep;
  rep.j = box.j;
  const long m = min_weight(phi.support(), j1, j2);
  rep.m = m;

  std::vector<Rational> scale_vec{pow2q(-j1), pow2q(-j2)};
  PolyPhase phi_j = phi.scaled(scale_vec) * pow2q(m);
  PolyPhase u = phi.hessian_det();
  PolyPhase u_scaled = u.scaled(scale_vec);
  rep.hessian_identity_exact =
      phi_j.hessian_det() == u_scaled * pow2q(2 * (m - j1 - j2));

  QuadConfig q = cfg;
  q.rel_tol = std::min(cfg.rel_tol, 1e-10);

  // original-coordinate side, windowed to the box ring
  double s1 = std::ldexp(1.0, j1), s2 = std::ldexp(1.0, j2);
  Osc2DSpec L = make_osc2d(phi, lambda, xi[0], xi[1], &chi, &u, eps, &psi);
  L.extra_amp = [s1, s2](double x, double y) {
    return annulus_eta(s1 * std::abs(x)) * annulus_eta(s2 * std::abs(y));
  };
  L.extra_amp_scale = 0.125 / std::max(s1, s2);
  L.dom1 = Interval(-2.0 / s1, 2.0 / s1);
  L.dom2 = Interval(-2.0 / s2, 2.0 / s2);
  IntegralValue vl = osc2d(L, q);

  // rescaled side on the reference annulus
  Osc2DSpec R;
  R.phase = flatten2(phi_j);
  PolyPhase pj1 = phi_j.partial(0), pj2 = phi_j.partial(1);
  R.d1 = flatten2(pj1);
  R.d2 = flatten2(pj2);
  R.lambda = lambda * std::ldexp(1.0, static_cast<int>(-m));
  R.xi1 = xi[0] * std::ldexp(1.0, static_cast<int>(m) - j1);
  R.xi2 = xi[1] * std::ldexp(1.0, static_cast<int>(m) - j2);
  R.chi = &chi;
  R.cutoff = flatten2(u_scaled);
  PolyPhase us1 = u_scaled.partial(0), us2 = u_scaled.partial(1);
  R.u1 = flatten2(us1);
  R.u2 = flatten2(us2);
  R.eps = eps;
  double i1 = 1.0 / s1, i2 = 1.0 / s2;
  R.extra_amp = [&psi, i1, i2](double x, double y) {
    return psi.value2(i1 * x, i2 * y) * annulus_eta(std::abs(x)) *
           annulus_eta(std::abs(y));
  };
  R.extra_amp_scale = 0.125;
  R.dom1 = Interval(-2.0, 2.0);
  R.dom2 = Interval(-2.0, 2.0);
  IntegralValue vr = osc2d(R, q);

  rep.lhs = vl.value;
  rep.rhs = vr.value * std::ldexp(1.0, -(j1 + j2));
  rep.nodes = vl.nodes + vr.nodes;
  double mag = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  if (mag < 1e-12) {
    rep.trivial = true;
    rep.rel_diff = 0.0;
    rep.ok = rep.hessian_identity_exact;
  } else {
    rep.rel_diff = std::abs(rep.lhs - rep.rhs) / mag;
    rep.ok = rep.hessian_identity_exact && rep.rel_diff <= 1e-8;
  }
  return rep;
}

}  // namespace hesscut
