#include "hesscut/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hesscut {

// ------------------------------------------------------- Gauss-Legendre

namespace {
std::map<int, std::pair<std::vector<double>, std::vector<double>>> g_gl_cache;
std::mutex g_gl_mutex;
}  // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  if (n < 1 || n > 128) throw ValidationError("Gauss-Legendre order out of range [1,128]");
  std::lock_guard<std::mutex> lock(g_gl_mutex);
  auto it = g_gl_cache.find(n);
  if (it != g_gl_cache.end()) return it->second;

  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / pp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[n - 1 - i] = xi;  // ascending order
    w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * pp * pp);
  }
  auto [pos, ok] = g_gl_cache.emplace(n, std::make_pair(std::move(x), std::move(w)));
  (void)ok;
  return pos->second;
}

// ------------------------------------------------------------ 2-D panels

namespace {

struct Panel2 {
  Interval X, Y;
};

struct Plan2 {
  std::vector<Panel2> panels;
  long nodes(int order) const {
    return static_cast<long>(panels.size()) * order * order;
  }
};

// Active bands of the cutoff argument in u-units: eps*[1,2] and, two-sided,
// also eps*[-2,-1].
bool u_range_active(const Osc2DSpec& s, const Interval& urange) {
  Interval pos(s.eps, 2.0 * s.eps);
  if (urange.intersects(pos)) return true;
  if (s.chi->two_sided()) {
    Interval neg(-2.0 * s.eps, -s.eps);
    if (urange.intersects(neg)) return true;
  }
  return false;
}

Plan2 plan2d(const Osc2DSpec& s, const Interval& xi1r, const Interval& xi2r,
             double osc_budget, const QuadConfig& cfg) {
  Interval rootX = s.dom1, rootY = s.dom2;
  if (s.psi) {
    const Interval s1 = s.psi->support(0), s2 = s.psi->support(1);
    rootX = Interval(std::max(rootX.lo, s1.lo), std::min(rootX.hi, s1.hi));
    rootY = Interval(std::max(rootY.lo, s2.lo), std::min(rootY.hi, s2.hi));
  }
  if (rootX.width() <= 0.0 || rootY.width() <= 0.0) return {};

  // all constraints tighten together across convergence passes
  const double refine = cfg.osc_budget / osc_budget;
  const double cut_budget = cfg.cutoff_budget / refine;
  double amp_scale = 1e300;
  if (s.psi)
    amp_scale = std::min(s.psi->axis(0).radius(), s.psi->axis(1).radius()) / 6.0;
  if (s.extra_amp_scale > 0.0) amp_scale = std::min(amp_scale, s.extra_amp_scale);
  amp_scale /= refine;

  Plan2 plan;
  struct Item {
    Interval X, Y;
    int depth;
  };
  std::vector<Item> stack{{rootX, rootY, 0}};
  const double min_width = 1e-9 * std::max(rootX.width(), rootY.width());
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    // cutoff culling: drop panels that certainly miss the active bands
    if (s.chi) {
      Interval ur = s.cutoff.bound(it.X, it.Y);
      if (!u_range_active(s, ur)) continue;
    }
    // per-axis demands: oscillation + cutoff-argument variation + smoothness
    double dpx = (s.d1.bound(it.X, it.Y) + xi1r).mag() * s.lambda;
    double dpy = (s.d2.bound(it.X, it.Y) + xi2r).mag() * s.lambda;
    double rx = it.X.width() * dpx / osc_budget;
    double ry = it.Y.width() * dpy / osc_budget;
    if (s.chi) {
      double cux = s.u1.bound(it.X, it.Y).mag() / s.eps;
      double cuy = s.u2.bound(it.X, it.Y).mag() / s.eps;
      rx = std::max(rx, it.X.width() * cux / cut_budget);
      ry = std::max(ry, it.Y.width() * cuy / cut_budget);
    }
    rx = std::max(rx, it.X.width() / amp_scale);
    ry = std::max(ry, it.Y.width() / amp_scale);
    if ((rx <= 1.0 && ry <= 1.0) || it.depth >= 60 ||
        std::max(it.X.width(), it.Y.width()) < min_width) {
      plan.panels.push_back({it.X, it.Y});
      if (static_cast<long>(plan.panels.size()) * cfg.gl_order * cfg.gl_order >
          cfg.max_nodes)
        throw BudgetError("osc2d: node budget exceeded while planning panels");
      continue;
    }
    if (rx >= ry) {
      double m = 0.5 * (it.X.lo + it.X.hi);
      stack.push_back({Interval(it.X.lo, m), it.Y, it.depth + 1});
      stack.push_back({Interval(m, it.X.hi), it.Y, it.depth + 1});
    } else {
      double m = 0.5 * (it.Y.lo + it.Y.hi);
      stack.push_back({it.X, Interval(it.Y.lo, m), it.depth + 1});
      stack.push_back({it.X, Interval(m, it.Y.hi), it.depth + 1});
    }
  }
  return plan;
}

Complex eval_panel(const Osc2DSpec& s, const Panel2& p, int order) {
  const auto& [gx, gw] = gauss_legendre(order);
  double mx = 0.5 * (p.X.lo + p.X.hi), hx = 0.5 * p.X.width();
  double my = 0.5 * (p.Y.lo + p.Y.hi), hy = 0.5 * p.Y.width();
  double xs[48], ws1[48], ys[48], ws2[48], a1[48], a2[48];
  for (int i = 0; i < order; ++i) {
    xs[i] = mx + hx * gx[i];
    ws1[i] = hx * gw[i];
    ys[i] = my + hy * gx[i];
    ws2[i] = hy * gw[i];
    a1[i] = s.psi ? s.psi->axis(0).value(xs[i] - s.psi->center(0)) : 1.0;
    a2[i] = s.psi ? s.psi->axis(1).value(ys[i] - s.psi->center(1)) : 1.0;
  }
  double psamp = s.psi ? s.psi->amp() : 1.0;
  Complex acc{};
  for (int i = 0; i < order; ++i) {
    if (a1[i] == 0.0) continue;
    for (int j = 0; j < order; ++j) {
      double amp = psamp * a1[i] * a2[j];
      if (amp == 0.0) continue;
      if (s.chi) {
        amp *= s.chi->value(s.cutoff(xs[i], ys[j]) / s.eps);
        if (amp == 0.0) continue;
      }
      if (s.extra_amp) {
        amp *= s.extra_amp(xs[i], ys[j]);
        if (amp == 0.0) continue;
      }
      double ph = s.lambda * (s.phase(xs[i], ys[j]) + s.xi1 * xs[i] + s.xi2 * ys[j]);
      acc += ws1[i] * ws2[j] * amp * Complex(std::cos(ph), std::sin(ph));
    }
  }
  return acc;
}

Complex eval_plan(const Osc2DSpec& s, const Plan2& plan, int order, bool parallel) {
  std::vector<Complex> parts(plan.panels.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long k = 0; k < static_cast<long>(plan.panels.size()); ++k)
    parts[k] = eval_panel(s, plan.panels[k], order);
  (void)parallel;
  return kahan_sum(parts);
}

}  // namespace

Osc2DSpec make_osc2d(const PolyPhase& phi, double lambda, double xi1, double xi2,
                     const Chi* chi, const PolyPhase* u, double eps,
                     const ProductBump* psi) {
  if (phi.dim() != 2) throw ValidationError("osc2d: phase must have 2 variables");
  Osc2DSpec s;
  s.phase = flatten2(phi);
  s.d1 = flatten2(phi.partial(0));
  s.d2 = flatten2(phi.partial(1));
  s.lambda = lambda;
  s.xi1 = xi1;
  s.xi2 = xi2;
  if (chi) {
    if (!u) throw ValidationError("osc2d: cutoff profile given without cutoff polynomial");
    if (!(eps > 0.0)) throw ValidationError("osc2d: cutoff requires eps > 0");
    s.chi = chi;
    s.cutoff = flatten2(*u);
    s.u1 = flatten2(u->partial(0));
    s.u2 = flatten2(u->partial(1));
    s.eps = eps;
  }
  s.psi = psi;
  return s;
}

IntegralValue osc2d(const Osc2DSpec& spec, const QuadConfig& cfg) {
  if (cfg.gl_order < 2 || cfg.gl_order > 48 || cfg.gl_order_check < 2 ||
      cfg.gl_order_check > 48)
    throw ValidationError("osc2d: panel orders must lie in [2,48]");
  if (spec.lambda > cfg.lambda_cap_2d)
    throw BudgetError("osc2d: lambda exceeds the 2-D frequency cap (" +
                      std::to_string(cfg.lambda_cap_2d) + ")");
  if (!spec.psi && !spec.extra_amp &&
      (spec.dom1.width() > 8.0 || spec.dom2.width() > 8.0))
    throw ValidationError(
        "osc2d: no amplitude given; clip the domain to at most width 8 per axis");
  Interval x1r = Interval::point(spec.xi1), x2r = Interval::point(spec.xi2);
  double budget = cfg.osc_budget;
  IntegralValue out;
  Complex prev{};
  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    Plan2 plan = plan2d(spec, x1r, x2r, budget, cfg);
    if (plan.nodes(cfg.gl_order) + plan.nodes(cfg.gl_order_check) > cfg.max_nodes)
      throw BudgetError("osc2d: node budget exceeded");
    Complex a = eval_plan(spec, plan, cfg.gl_order, cfg.parallel);
    Complex b = eval_plan(spec, plan, cfg.gl_order_check, cfg.parallel);
    out.value = b;
    out.est_error = std::abs(a - b);
    out.nodes += plan.nodes(cfg.gl_order) + plan.nodes(cfg.gl_order_check);
    out.passes = pass + 1;
    double target = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(b));
    // also require pass-to-pass stability after the first refinement
    bool stable = pass == 0 || std::abs(b - prev) <= 4.0 * target;
    if (out.est_error <= target && stable) {
      out.converged = true;
      return out;
    }
    prev = b;
    budget *= 0.5;
  }
  out.converged = false;
  return out;
}

std::vector<Complex> osc2d_xi_grid(const Osc2DSpec& base,
                                   const std::vector<double>& xi1s,
                                   const std::vector<double>& xi2s,
                                   const QuadConfig& cfg, long* nodes_out) {
  if (cfg.gl_order < 2 || cfg.gl_order > 48)
    throw ValidationError("osc2d_xi_grid: panel order must lie in [2,48]");
  if (base.lambda > cfg.lambda_cap_2d)
    throw BudgetError("osc2d_xi_grid: lambda exceeds the 2-D frequency cap");
  if (xi1s.empty() || xi2s.empty())
    throw ValidationError("osc2d_xi_grid: empty xi grid");
  Interval x1r(*std::min_element(xi1s.begin(), xi1s.end()),
               *std::max_element(xi1s.begin(), xi1s.end()));
  Interval x2r(*std::min_element(xi2s.begin(), xi2s.end()),
               *std::max_element(xi2s.begin(), xi2s.end()));
  Plan2 plan = plan2d(base, x1r, x2r, cfg.osc_budget, cfg);
  if (plan.nodes(cfg.gl_order) > cfg.max_nodes)
    throw BudgetError("osc2d_xi_grid: node budget exceeded");
  if (nodes_out) *nodes_out = plan.nodes(cfg.gl_order);

  const int order = cfg.gl_order;
  const auto& [gx, gw] = gauss_legendre(order);
  const size_t n1 = xi1s.size(), n2 = xi2s.size();
  std::vector<Complex> total(n1 * n2, Complex{});
  std::vector<Complex> comp(n1 * n2, Complex{});  // Kahan compensation

  // process panels in fixed blocks; parallel within a block, ordered reduce
  const long nblock = 256;
  const long npan = static_cast<long>(plan.panels.size());
  std::vector<std::vector<Complex>> block(nblock);
  for (long b0 = 0; b0 < npan; b0 += nblock) {
    long b1 = std::min(npan, b0 + nblock);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (cfg.parallel)
#endif
    for (long k = b0; k < b1; ++k) {
      const Panel2& p = plan.panels[k];
      std::vector<Complex>& out = block[k - b0];
      out.assign(n1 * n2, Complex{});
      double mx = 0.5 * (p.X.lo + p.X.hi), hx = 0.5 * p.X.width();
      double my = 0.5 * (p.Y.lo + p.Y.hi), hy = 0.5 * p.Y.width();
      double xs[48], ys[48];
      Complex W[48][48];
      bool any = false;
      for (int i = 0; i < order; ++i) {
        xs[i] = mx + hx * gx[i];
        ys[i] = my + hy * gx[i];
      }
      for (int i = 0; i < order; ++i) {
        double a1 = base.psi ? base.psi->axis(0).value(xs[i] - base.psi->center(0)) : 1.0;
        for (int j = 0; j < order; ++j) {
          double amp = a1;
          if (amp != 0.0 && base.psi)
            amp *= base.psi->amp() *
                   base.psi->axis(1).value(ys[j] - base.psi->center(1));
          if (amp != 0.0 && base.chi)
            amp *= base.chi->value(base.cutoff(xs[i], ys[j]) / base.eps);
          if (amp != 0.0 && base.extra_amp) amp *= base.extra_amp(xs[i], ys[j]);
          if (amp == 0.0) {
            W[i][j] = Complex{};
            continue;
          }
          any = true;
          double ph = base.lambda * base.phase(xs[i], ys[j]);
          W[i][j] = hx * gw[i] * hy * gw[j] * amp * Complex(std::cos(ph), std::sin(ph));
        }
      }
      if (!any) {
        out.clear();
        continue;
      }
      // factored xi evaluation: I(xi) = sum_i e^{i lam xi1 x_i} sum_j W_ij e^{i lam xi2 y_j}
      std::vector<Complex> rows(order);
      for (size_t j2 = 0; j2 < n2; ++j2) {
        Complex u2[48];
        for (int j = 0; j < order; ++j) {
          double ph = base.lambda * xi2s[j2] * ys[j];
          u2[j] = Complex(std::cos(ph), std::sin(ph));
        }
        for (int i = 0; i < order; ++i) {
          Complex r{};
          for (int j = 0; j < order; ++j) r += W[i][j] * u2[j];
          rows[i] = r;
        }
        for (size_t i1 = 0; i1 < n1; ++i1) {
          Complex v{};
          for (int i = 0; i < order; ++i) {
            double ph = base.lambda * xi1s[i1] * xs[i];
            v += Complex(std::cos(ph), std::sin(ph)) * rows[i];
          }
          out[i1 * n2 + j2] = v;
        }
      }
    }
    // ordered compensated reduction
    for (long k = b0; k < b1; ++k) {
      const std::vector<Complex>& out = block[k - b0];
      if (out.empty()) continue;
      for (size_t m = 0; m < n1 * n2; ++m) {
        Complex y = out[m] - comp[m];
        Complex t = total[m] + y;
        comp[m] = (t - total[m]) - y;
        total[m] = t;
      }
    }
  }
  return total;
}

IntegralValue nondeg_integral(const PolyPhase& phi, const std::vector<double>& p,
                              double t, const ProductBump& psi, const QuadConfig& cfg) {
  if (!(t > 0.0)) throw ValidationError("nondeg_integral: t must be positive");
  Osc2DSpec s = make_osc2d(phi, 1.0 / t, 0.0, 0.0, nullptr, nullptr, 0.0, &psi);
  IntegralValue v = osc2d(s, cfg);
  // factor exp(-i Phi(p)/t) * t^{-n/2}, n = 2
  std::vector<double> pd(p.begin(), p.end());
  double ph = -phi.eval_d(pd) / t;
  Complex rot(std::cos(ph), std::sin(ph));
  v.value = v.value * rot / t;
  v.est_error /= t;
  return v;
}

// ---------------------------------------------------------------- 1-D case

namespace {

struct Plan1 {
  std::vector<Interval> panels;
};

Plan1 plan1d(const Osc1DSpec& s, double budget, const QuadConfig& cfg) {
  // sampled derivative bound, inflated; refined by the convergence loop
  const int M = 2049;
  std::vector<double> fp(M);
  double span = s.b - s.a;
  for (int i = 0; i < M; ++i) fp[i] = std::abs(s.fprime(s.a + span * i / (M - 1)));
  auto seg_sup = [&](double x0, double x1) {
    int i0 = std::max(0, static_cast<int>(std::floor((x0 - s.a) / span * (M - 1))));
    int i1 = std::min(M - 1, static_cast<int>(std::ceil((x1 - s.a) / span * (M - 1))));
    double m = 0.0;
    for (int i = i0; i <= i1; ++i) m = std::max(m, fp[i]);
    return 1.5 * m;  // inflation for inter-sample variation
  };
  Plan1 plan;
  struct Item {
    double a, b;
    int depth;
  };
  // smoothness floor tightens together with the oscillation budget
  const double smooth_cap = span * (budget / cfg.osc_budget) / 8.0;
  std::vector<Item> stack{{s.a, s.b, 0}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    double w = it.b - it.a;
    bool ok = w <= smooth_cap && w * seg_sup(it.a, it.b) / s.t <= budget;
    if (ok || it.depth >= 48) {
      plan.panels.push_back(Interval(it.a, it.b));
      if (static_cast<long>(plan.panels.size()) * cfg.gl_order > cfg.max_nodes)
        throw BudgetError("osc1d: node budget exceeded while planning");
      continue;
    }
    double m = 0.5 * (it.a + it.b);
    stack.push_back({it.a, m, it.depth + 1});
    stack.push_back({m, it.b, it.depth + 1});
  }
  std::sort(plan.panels.begin(), plan.panels.end(),
            [](const Interval& u, const Interval& v) { return u.lo < v.lo; });
  return plan;
}

Complex eval_plan1(const Osc1DSpec& s, const Plan1& plan, int order, bool parallel) {
  const auto& [gx, gw] = gauss_legendre(order);
  std::vector<Complex> parts(plan.panels.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long k = 0; k < static_cast<long>(plan.panels.size()); ++k) {
    const Interval& p = plan.panels[k];
    double mid = 0.5 * (p.lo + p.hi), half = 0.5 * p.width();
    Complex acc{};
    for (int i = 0; i < order; ++i) {
      double x = mid + half * gx[i];
      double amp = s.w(x);
      if (amp == 0.0) continue;
      double ph = s.f(x) / s.t;
      acc += half * gw[i] * amp * Complex(std::cos(ph), std::sin(ph));
    }
    parts[k] = acc;
  }
  (void)parallel;
  return kahan_sum(parts);
}

}  // namespace

IntegralValue osc1d(const Osc1DSpec& spec, const QuadConfig& cfg) {
  if (!(spec.b > spec.a)) throw ValidationError("osc1d: empty interval");
  if (1.0 / spec.t > cfg.lambda_cap_1d)
    throw BudgetError("osc1d: frequency 1/t exceeds the 1-D cap");
  double budget = cfg.osc_budget;
  IntegralValue out;
  Complex prev{};
  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    Plan1 plan = plan1d(spec, budget, cfg);
    Complex a = eval_plan1(spec, plan, cfg.gl_order, cfg.parallel);
    Complex b = eval_plan1(spec, plan, cfg.gl_order_check, cfg.parallel);
    out.value = b;
    out.est_error = std::abs(a - b);
    out.nodes += static_cast<long>(plan.panels.size()) * (cfg.gl_order + cfg.gl_order_check);
    out.passes = pass + 1;
    double target = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(b));
    bool stable = pass == 0 || std::abs(b - prev) <= 4.0 * target;
    if (out.est_error <= target && stable) {
      out.converged = true;
      return out;
    }
    prev = b;
    budget *= 0.5;
  }
  out.converged = false;
  return out;
}

double integrate1d(const std::function<double(double)>& w, double a, double b,
                   const QuadConfig& cfg) {
  Osc1DSpec s;
  s.f = [](double) { return 0.0; };
  s.fprime = [](double) { return 0.0; };
  s.w = w;
  s.a = a;
  s.b = b;
  s.t = 1.0;
  QuadConfig c = cfg;
  c.max_passes = std::max(cfg.max_passes, 8);
  return osc1d(s, c).value.real();
}

}  // namespace hesscut
