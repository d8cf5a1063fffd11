#include "hesscut/newton.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hesscut {

NewtonPolygon build_polygon(const PolyPhase& p) {
  if (p.dim() != 2) throw ValidationError("build_polygon: phase must have 2 variables");
  if (p.is_zero()) throw ValidationError("build_polygon: zero polynomial has no polygon");
  NewtonPolygon g;
  for (const auto& e : p.support()) g.support.push_back({e[0], e[1]});

  // Pareto-minimal support points (everything else lies in some quadrant)
  std::vector<Vec2i> pts;
  for (const Vec2i& a : g.support) {
    bool dominated = false;
    for (const Vec2i& b : g.support) {
      if (b == a) continue;
      if (b.k1 <= a.k1 && b.k2 <= a.k2) {
        dominated = true;
        break;
      }
    }
    if (!dominated) pts.push_back(a);
  }
  std::sort(pts.begin(), pts.end(), [](const Vec2i& a, const Vec2i& b) {
    if (a.k1 != b.k1) return a.k1 < b.k1;
    return a.k2 > b.k2;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // lower-left convex chain; collinear middle points are absorbed
  std::vector<Vec2i>& hull = g.vertices;
  for (const Vec2i& c : pts) {
    while (hull.size() >= 2) {
      const Vec2i& a = hull[hull.size() - 2];
      const Vec2i& b = hull[hull.size() - 1];
      long cross = static_cast<long>(b.k1 - a.k1) * (c.k2 - b.k2) -
                   static_cast<long>(b.k2 - a.k2) * (c.k1 - b.k1);
      if (cross <= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(c);
  }

  // Newton distance: smallest t with (t,t) inside; the polygon is the
  // intersection of the edge half-planes with k1 >= first.k1, k2 >= last.k2
  Rational t(hull.front().k1);
  t = std::max(t, Rational(hull.back().k2));
  for (size_t i = 0; i + 1 < hull.size(); ++i) {
    const Vec2i &a = hull[i], &b = hull[i + 1];
    Rational de = (Rational(a.k2) * b.k1 - Rational(a.k1) * b.k2) /
                  (Rational(b.k1 - a.k1) - Rational(b.k2 - a.k2));
    t = std::max(t, de);
  }
  g.distance = t;
  g.diagonal_at_vertex = false;
  for (const Vec2i& v : hull)
    if (v.k1 == v.k2 && Rational(v.k1) == t) g.diagonal_at_vertex = true;
  return g;
}

int diagonal_class(const NewtonPolygon& g) { return g.diagonal_at_vertex ? 1 : 0; }

std::vector<EdgeData> edge_data(const PolyPhase& p, const NewtonPolygon& g) {
  std::vector<EdgeData> out;
  for (size_t i = 0; i + 1 < g.vertices.size(); ++i) {
    const Vec2i &a = g.vertices[i], &b = g.vertices[i + 1];
    EdgeData e;
    e.a = a;
    e.b = b;
    e.beta_sq = Rational(a.k2 - b.k2) / Rational(b.k1 - a.k1);
    e.newton_distance = (Rational(a.k2) * b.k1 - Rational(a.k1) * b.k2) /
                        (Rational(b.k1 - a.k1) - Rational(b.k2 - a.k2));
    e.touches_axis1 = b.k2 == 0;
    e.touches_axis2 = a.k1 == 0;
    PolyPhase ep(2);
    for (const auto& [exp, c] : p.terms()) {
      long cross = static_cast<long>(b.k1 - a.k1) * (exp[1] - a.k2) -
                   static_cast<long>(b.k2 - a.k2) * (exp[0] - a.k1);
      if (cross == 0 && exp[0] >= a.k1 && exp[0] <= b.k1) ep.add_term(exp, c);
    }
    e.edge_poly = ep;
    out.push_back(e);
  }
  return out;
}

std::string region_name(Region r) {
  switch (r) {
    case Region::OffAxes:
      return "off-axes";
    case Region::NearAxis1:
      return "near-axis1";
    case Region::NearAxis2:
      return "near-axis2";
  }
  return "?";
}

std::vector<Region> applicable_regions(const EdgeData& e) {
  std::vector<Region> rs{Region::OffAxes};
  if (e.touches_axis1) rs.push_back(Region::NearAxis1);
  if (e.touches_axis2) rs.push_back(Region::NearAxis2);
  return rs;
}

namespace {

std::vector<std::pair<Interval, Interval>> region_boxes(Region r,
                                                        const WhitneyParams& p) {
  double m = p.margin, B = p.box_half;
  std::vector<std::pair<Interval, Interval>> boxes;
  switch (r) {
    case Region::OffAxes:
      for (int s1 : {-1, 1})
        for (int s2 : {-1, 1})
          boxes.push_back({s1 > 0 ? Interval(m, B) : Interval(-B, -m),
                           s2 > 0 ? Interval(m, B) : Interval(-B, -m)});
      break;
    case Region::NearAxis1:  // strip along the x1-axis, origin excluded
      for (int s1 : {-1, 1})
        boxes.push_back({s1 > 0 ? Interval(m, B) : Interval(-B, -m), Interval(-m, m)});
      break;
    case Region::NearAxis2:
      for (int s2 : {-1, 1})
        boxes.push_back({Interval(-m, m), s2 > 0 ? Interval(m, B) : Interval(-B, -m)});
      break;
  }
  return boxes;
}

double bisect_root(const FlatPoly2& h, bool vertical, double fixed, double a, double b) {
  double fa = vertical ? h(fixed, a) : h(a, fixed);
  for (int i = 0; i < 80; ++i) {
    double m = 0.5 * (a + b);
    double fm = vertical ? h(fixed, m) : h(m, fixed);
    if (fm == 0.0) return m;
    if ((fa < 0) != (fm < 0))
      b = m;
    else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

FoldReport whitney_check(const PolyPhase& f, Region region, const WhitneyParams& prm) {
  if (f.dim() != 2) throw ValidationError("whitney_check: phase must have 2 variables");
  FoldReport rep;
  PolyPhase hp = f.hessian_det();
  FlatPoly2 h = flatten2(hp);
  FlatPoly2 h1 = flatten2(hp.partial(0)), h2 = flatten2(hp.partial(1));
  auto hs = f.hessian();
  FlatPoly2 H11 = flatten2(hs[0][0]), H12 = flatten2(hs[0][1]), H22 = flatten2(hs[1][1]);

  // scale bounds over the whole working box (sup-norm style)
  Interval full(-prm.box_half, prm.box_half);
  double s_grad = std::hypot(h1.bound(full, full).mag(), h2.bound(full, full).mag());
  double s_inj = std::sqrt(std::pow(H11.bound(full, full).mag(), 2) +
                           2 * std::pow(H12.bound(full, full).mag(), 2) +
                           std::pow(H22.bound(full, full).mag(), 2));
  if (s_grad == 0.0) s_grad = 1.0;  // constant det: no zeros will be found anyway
  if (s_inj == 0.0) s_inj = 1.0;

  std::vector<std::pair<double, double>> roots;
  auto boxes = region_boxes(region, prm);
  for (const auto& [X, Y] : boxes) {
    int nx = std::max(2, static_cast<int>(std::ceil(X.width() * prm.density)) + 1);
    int ny = std::max(2, static_cast<int>(std::ceil(Y.width() * prm.density)) + 1);
    // vertical lines: scan x2 along each fixed x1 (and transposed)
    for (int orient = 0; orient < 2; ++orient) {
      int nl = orient == 0 ? nx : ny;
      int ns = orient == 0 ? ny : nx;
      const Interval& L = orient == 0 ? X : Y;
      const Interval& S = orient == 0 ? Y : X;
      for (int i = 0; i < nl; ++i) {
        double fixed = L.lo + L.width() * i / (nl - 1);
        double prev = 0.0;
        for (int j = 0; j < ns; ++j) {
          double sj = S.lo + S.width() * j / (ns - 1);
          double val = orient == 0 ? h(fixed, sj) : h(sj, fixed);
          if (val == 0.0) {
            roots.push_back(orient == 0 ? std::make_pair(fixed, sj)
                                        : std::make_pair(sj, fixed));
          } else if (j > 0 && prev != 0.0 && (prev < 0) != (val < 0)) {
            double s0 = S.lo + S.width() * (j - 1) / (ns - 1);
            double r = bisect_root(h, orient == 0, fixed, s0, sj);
            roots.push_back(orient == 0 ? std::make_pair(fixed, r)
                                        : std::make_pair(r, fixed));
          }
          prev = val;
        }
      }
    }
  }

  if (roots.empty()) {
    // certify nonvanishing by interval subdivision
    bool certified = true;
    for (const auto& [X, Y] : boxes) {
      const int N = 64;
      for (int i = 0; i < N && certified; ++i)
        for (int j = 0; j < N && certified; ++j) {
          Interval cx(X.lo + X.width() * i / N, X.lo + X.width() * (i + 1) / N);
          Interval cy(Y.lo + Y.width() * j / N, Y.lo + Y.width() * (j + 1) / N);
          Interval hb = h.bound(cx, cy).inflated(1e-13);
          if (hb.contains(0.0)) certified = false;
        }
    }
    rep.vacuous = certified;
    rep.verdict = certified ? FoldVerdict::Fold : FoldVerdict::Inconclusive;
    return rep;
  }

  rep.min_grad_scaled = 1e300;
  rep.min_inj_scaled = 1e300;
  bool violated = false;
  for (const auto& [x, y] : roots) {
    ++rep.roots_checked;
    double g1 = h1(x, y), g2 = h2(x, y);
    double gn = std::hypot(g1, g2);
    double grad_scaled = gn / s_grad;
    rep.min_grad_scaled = std::min(rep.min_grad_scaled, grad_scaled);
    if (grad_scaled < prm.tau1) {
      violated = true;
      if (rep.witnesses.size() < 8)
        rep.witnesses.push_back(
            {x, y, "singular-set regularity: |grad det Hess| / scale = " +
                       std::to_string(grad_scaled) + " below tau1"});
      continue;
    }
    // tangent of the zero curve: rotate grad h by 90 degrees
    double t1 = -g2 / gn, t2 = g1 / gn;
    double v1 = H11(x, y) * t1 + H12(x, y) * t2;
    double v2 = H12(x, y) * t1 + H22(x, y) * t2;
    double inj_scaled = std::hypot(v1, v2) / s_inj;
    rep.min_inj_scaled = std::min(rep.min_inj_scaled, inj_scaled);
    if (inj_scaled < prm.tau2) {
      violated = true;
      if (rep.witnesses.size() < 8)
        rep.witnesses.push_back(
            {x, y, "fold differential kernel: |Hess . T| / scale = " +
                       std::to_string(inj_scaled) + " below tau2 (kernel direction (" +
                       std::to_string(t1) + ", " + std::to_string(t2) + "))"});
    }
  }
  rep.verdict = violated ? FoldVerdict::Violation : FoldVerdict::Fold;
  return rep;
}

}  // namespace hesscut
