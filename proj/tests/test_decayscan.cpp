// Tests for the decay-rate machinery: the dyadic window partition, the
// sup-over-tilt search, power-law fitting with log-factor detection, the
// degenerate-phase profile, bi-dyadic box classification, and the rescaling
// identities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hesscut/bump.hpp"
#include "hesscut/common.hpp"
#include "hesscut/decayscan.hpp"
#include "hesscut/newton.hpp"
#include "hesscut/polyphase.hpp"
#include "hesscut/quadrature.hpp"

using namespace hesscut;

namespace {

PolyPhase cubic() { return PolyPhase::from_terms(2, {{{3, 0}, 1}, {{0, 3}, 1}}); }

PolyPhase quad_phase() {
  return PolyPhase::from_terms(2, {{{2, 0}, Rational(1, 2)}, {{0, 2}, Rational(1, 2)}});
}

// (x2 + x1^2)^2 expanded
PolyPhase cusp_square() {
  return PolyPhase::from_terms(2, {{{0, 2}, 1}, {{2, 1}, 2}, {{4, 0}, 1}});
}

PolyPhase quartic_diag() { return PolyPhase::from_terms(2, {{{2, 2}, 1}}); }

const BoxClass& box_at(const std::vector<BoxClass>& boxes, int j1, int j2) {
  for (const BoxClass& b : boxes)
    if (b.j[0] == j1 && b.j[1] == j2) return b;
  REQUIRE(false);
  return boxes.front();
}

std::vector<double> dyadic(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

}  // namespace

TEST_CASE("dyadic annulus window partitions every positive ray") {
  // support is exactly [1/2, 2]
  CHECK(annulus_eta(0.49) == 0.0);
  CHECK(annulus_eta(0.5) == 0.0);
  CHECK(annulus_eta(2.0) == 0.0);
  CHECK(annulus_eta(2.01) == 0.0);
  CHECK(annulus_eta(1.0) > 0.0);
  CHECK(annulus_eta(1.3) > 0.0);

  // sum over the dyadic orbit is exactly one for every v > 0; at most two
  // consecutive k contribute, so a generous k-range is exhaustive
  double worst = 0.0;
  for (int i = 0; i <= 320; ++i) {
    double v = std::pow(10.0, -4.0 + 8.0 * i / 320.0);
    double sum = 0.0;
    for (int k = -25; k <= 25; ++k) sum += annulus_eta(std::ldexp(v, k));
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("default tilt box covers the negated gradient range plus margin") {
  ProductBump psi = ProductBump::standard(2);  // support [-1/2, 1/2]^2

  // grad of |x|^2/2 is x, so the box is [-1/2,1/2] +/- the 0.5 margin
  XiBox b = default_xi_box(quad_phase(), psi);
  CHECK(b.xi1.lo == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(b.xi1.hi == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.xi2.lo == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(b.xi2.hi == doctest::Approx(1.0).epsilon(1e-14));

  // asymmetric phase: grad(x1^2 + x1 x2) = (2x1 + x2, x1), interval-exact
  PolyPhase skew = PolyPhase::from_terms(2, {{{2, 0}, 1}, {{1, 1}, 1}});
  XiBox s = default_xi_box(skew, psi);
  CHECK(s.xi1.lo == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(s.xi1.hi == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.xi2.lo == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(s.xi2.hi == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(default_xi_box(quad_phase(), psi, -0.1), ValidationError);
  CHECK_THROWS_AS(default_xi_box(PolyPhase::from_terms(1, {{{2}, 1}}), psi),
                  ValidationError);
}

TEST_CASE("tilt search: symmetric maximum, far-tilt decay, empty cutoff") {
  PolyPhase phi = quad_phase();
  ProductBump psi = ProductBump::standard(2);
  Chi chi;  // two-sided
  XiBox box;  // [-1,1]^2
  ScanConfig cfg;
  cfg.coarse = 9;
  cfg.refine = 5;
  cfg.passes = 1;

  // det Hess = 1, so eps = 0.7 puts 1/eps inside the cutoff band (1, 2)
  SUBCASE("argmax of the completed square sits at zero tilt") {
    ScanRecord r = sup_over_xi(phi, 40.0, 0.7, chi, psi, box, cfg);
    CHECK(r.lambda == 40.0);
    CHECK(r.eps == 0.7);
    CHECK(r.xi_star[0] == 0.0);
    CHECK(r.xi_star[1] == 0.0);
    CHECK(r.sup_val > 0.0);
    CHECK(r.sup_val >= r.val_at_zero);
    CHECK(r.sup_val == doctest::Approx(r.val_at_zero).epsilon(1e-12));
    CHECK(r.nodes_used > 0);

    // a tilt far outside the gradient range leaves no stationary point and
    // the integral collapses by nonstationary decay
    PolyPhase u = phi.hessian_det();
    Osc2DSpec far = make_osc2d(phi, 40.0, 5.0, 5.0, &chi, &u, 0.7, &psi);
    double far_val = std::abs(osc2d(far).value);
    CHECK(r.sup_val >= 10.0 * far_val);
  }

  SUBCASE("cutoff band missed entirely gives an exactly zero sup") {
    // 1/eps = 10 lies outside both bands [1,2] and [-2,-1]
    ScanRecord r = sup_over_xi(phi, 40.0, 0.1, chi, psi, box, cfg);
    CHECK(r.sup_val == 0.0);
    CHECK(r.val_at_zero == 0.0);
  }

  SUBCASE("grid sweep preserves (lambda, eps) row-major order") {
    std::vector<ScanRecord> recs =
        scan_grid(phi, {8.0, 16.0}, {0.7, 0.6}, chi, psi, box, cfg);
    REQUIRE(recs.size() == 4);
    CHECK(recs[0].lambda == 8.0);
    CHECK(recs[0].eps == 0.7);
    CHECK(recs[1].lambda == 8.0);
    CHECK(recs[1].eps == 0.6);
    CHECK(recs[2].lambda == 16.0);
    for (const ScanRecord& r : recs) CHECK(r.sup_val >= r.val_at_zero);
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(sup_over_xi(phi, -1.0, 0.7, chi, psi, box, cfg),
                    ValidationError);
    CHECK_THROWS_AS(sup_over_xi(phi, 40.0, 0.0, chi, psi, box, cfg),
                    ValidationError);
    ScanConfig bad = cfg;
    bad.coarse = 1;
    CHECK_THROWS_AS(sup_over_xi(phi, 40.0, 0.7, chi, psi, box, bad),
                    ValidationError);
    CHECK_THROWS_AS(scan_grid(phi, {}, {0.5}, chi, psi, box, cfg),
                    ValidationError);
  }
}

TEST_CASE("decay fit recovers exact power laws and flags synthetic log factors") {
  auto make_records = [](bool with_log, bool jitter) {
    std::vector<ScanRecord> recs;
    int i = 0;
    for (int le = 4; le <= 11; ++le)
      for (int ee = -8; ee <= -2; ++ee) {
        ScanRecord r;
        r.lambda = std::ldexp(1.0, le);
        r.eps = std::ldexp(1.0, ee);
        r.sup_val = 1.0 / (r.lambda * std::sqrt(r.eps));
        if (with_log) r.sup_val *= 1.0 + 0.5 * std::log(1.0 / r.eps);
        if (jitter) r.sup_val *= 1.0 + 1e-3 * std::sin(7.0 * i + 1.0);
        recs.push_back(r);
        ++i;
      }
    return recs;
  };

  SUBCASE("exact power law") {
    FitResult f = fit_decay(make_records(false, false), 0);
    CHECK(f.rho_lambda == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.rho_eps == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::abs(f.log_slope) <= 1e-12);
    CHECK(f.rms_power <= 1e-12);
    CHECK(f.rms_comp_const <= 1e-12);
    CHECK(f.comp_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.s_hint == 0);
  }

  SUBCASE("log factor detected with a large t-statistic") {
    FitResult f = fit_decay(make_records(true, true), 1);
    CHECK(f.log_slope > 0.0);
    CHECK(f.log_slope == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(f.log_slope_tstat > 4.0);
    CHECK(f.rms_comp_log < f.rms_comp_const);
    CHECK(f.s_hint == 1);
  }

  SUBCASE("validation") {
    std::vector<ScanRecord> good = make_records(false, false);
    CHECK_THROWS_AS(fit_decay(good, 2), ValidationError);
    CHECK_THROWS_AS(fit_decay(good, -1), ValidationError);

    // five distinct lambda values only
    std::vector<ScanRecord> few;
    for (const ScanRecord& r : good)
      if (r.lambda <= 256.0) few.push_back(r);
    CHECK_THROWS_AS(fit_decay(few, 0), ValidationError);

    // eight distinct lambdas spanning less than two dyadic decades
    std::vector<ScanRecord> narrow;
    for (int l = 16; l <= 23; ++l)
      for (int ee = -8; ee <= -2; ++ee) {
        ScanRecord r;
        r.lambda = l;
        r.eps = std::ldexp(1.0, ee);
        r.sup_val = 1.0;
        narrow.push_back(r);
      }
    CHECK_THROWS_AS(fit_decay(narrow, 0), ValidationError);

    std::vector<ScanRecord> zero = good;
    zero[10].sup_val = 0.0;
    CHECK_THROWS_AS(fit_decay(zero, 0), ValidationError);
    zero[10].sup_val = -1.0;
    CHECK_THROWS_AS(fit_decay(zero, 0), ValidationError);
  }
}

TEST_CASE("degenerate profile approaches the separated 1-D product") {
  Chi chi(false);  // one-sided cutoff, matching the closed-form target
  ProductBump psi = ProductBump::standard(2);

  ProfileResult p = counterexample_profile(dyadic(4, 8), chi, psi);

  // frozen 1-D factor values (independent quadratures of the two factors)
  CHECK(p.factor_chi == doctest::Approx(2.774840252e-2).epsilon(1e-6));
  CHECK(p.factor_psi == doctest::Approx(8.055608571e-2).epsilon(1e-6));
  CHECK(p.target == doctest::Approx(2.235302692e-3).epsilon(1e-6));

  REQUIRE(p.rows.size() == 5);
  for (const ProfileRow& r : p.rows) {
    CHECK(r.eps == doctest::Approx(1.0 / std::sqrt(r.lambda)).epsilon(1e-14));
    CHECK(r.compensated ==
          doctest::Approx(r.absval * std::sqrt(r.lambda)).epsilon(1e-14));
    // the compensated value is already within 1% of the separated product
    CHECK(r.compensated == doctest::Approx(p.target).epsilon(1e-2));
  }
  // regression pins for the first and last rows
  CHECK(p.rows.front().lambda == 16.0);
  CHECK(p.rows.front().compensated ==
        doctest::Approx(2.249279077e-3).epsilon(1e-6));
  CHECK(p.rows.back().compensated ==
        doctest::Approx(2.242702412e-3).epsilon(1e-6));

  // the fitted exponent already sits near -1/2 on this short window
  CHECK(p.fitted_exponent > -0.52);
  CHECK(p.fitted_exponent < -0.48);

  // the change of variables x2 -> lambda^{-1/2} y - x1^2 is an identity of
  // integrals at every finite lambda, not just in the limit
  CHECK(counterexample_substitution_diff(64.0, chi, psi) <= 1e-8);

  CHECK_THROWS_AS(counterexample_profile({16.0}, chi, psi), ValidationError);
  CHECK_THROWS_AS(counterexample_profile({16.0, -1.0}, chi, psi),
                  ValidationError);
  CHECK_THROWS_AS(
      counterexample_profile(dyadic(4, 6), chi, ProductBump::standard(1)),
      ValidationError);
  CHECK_THROWS_AS(counterexample_substitution_diff(0.0, chi, psi),
                  ValidationError);
}

TEST_CASE("bi-dyadic classification matches the hand-derived tables") {
  Chi chi;  // two-sided

  SUBCASE("x1^3 + x2^3: edge band |j1 - j2| <= 1, vertex boxes beyond") {
    PolyPhase phi = cubic();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.25, chi);
    REQUIRE(boxes.size() == 17 * 17);

    // away from the diagonal one monomial dominates: small x2 leaves x1^3
    CHECK(box_at(boxes, 0, 2).kind == BoxKind::Vertex);
    CHECK(box_at(boxes, 0, 2).alpha == Vec2i{3, 0});
    CHECK(box_at(boxes, 2, 0).kind == BoxKind::Vertex);
    CHECK(box_at(boxes, 2, 0).alpha == Vec2i{0, 3});
    CHECK(box_at(boxes, 4, 0).alpha == Vec2i{0, 3});

    // |j1 - j2| <= 1 fails the 0.1 dominance margin and joins the edge band
    const BoxClass& diag = box_at(boxes, 3, 3);
    CHECK(diag.kind == BoxKind::Edge);
    CHECK(diag.edge_index == 0);
    CHECK(diag.m == 9);  // min of 3 j1, 3 j2
    CHECK(diag.band == doctest::Approx(std::ldexp(1.0, -6)).epsilon(1e-14));
    CHECK(diag.rel_remainder == doctest::Approx(1.0).epsilon(1e-14));
    const BoxClass& off = box_at(boxes, 3, 2);
    CHECK(off.kind == BoxKind::Edge);
    CHECK(off.rel_remainder == doctest::Approx(0.125).epsilon(1e-14));

    // partition: every box is classified, none negligible for this phase
    int nv = 0, ne = 0, nn = 0;
    for (const BoxClass& b : boxes) {
      if (b.kind == BoxKind::Vertex) ++nv;
      if (b.kind == BoxKind::Edge) ++ne;
      if (b.kind == BoxKind::Negligible) ++nn;
    }
    CHECK(ne == 49);  // |j1 - j2| <= 1 within [0,16]^2
    CHECK(nv == 289 - 49);
    CHECK(nn == 0);
  }

  SUBCASE("(x2 + x1^2)^2: the edge touches both axes, band is one-sided twice") {
    PolyPhase phi = cusp_square();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.0625, chi);

    CHECK(box_at(boxes, 0, 4).kind == BoxKind::Vertex);
    CHECK(box_at(boxes, 0, 4).alpha == Vec2i{4, 0});
    CHECK(box_at(boxes, 4, 2).kind == BoxKind::Vertex);
    CHECK(box_at(boxes, 4, 2).alpha == Vec2i{0, 2});

    // the compact edge (0,2)-(4,0) meets both axes, so the band condition
    // holds on both sides and every non-dominated box is edge-classified;
    // (2,0) sits outside the two-sided band |2 j1 - j2| <= 2 sqrt(2) yet is
    // still covered
    CHECK(box_at(boxes, 0, 0).kind == BoxKind::Edge);
    CHECK(box_at(boxes, 0, 0).edge_index == 0);
    CHECK(box_at(boxes, 2, 0).kind == BoxKind::Edge);
    CHECK(box_at(boxes, 3, 6).kind == BoxKind::Edge);
    for (const BoxClass& b : boxes)
      CHECK(b.kind != BoxKind::Negligible);
  }

  SUBCASE("x1^2 x2^2: single monomial, every box is its own vertex") {
    PolyPhase phi = quartic_diag();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.01, chi);
    for (const BoxClass& b : boxes) {
      CHECK(b.kind == BoxKind::Vertex);
      CHECK(b.alpha == Vec2i{2, 2});
      CHECK(b.rel_remainder == 0.0);
    }
  }

  SUBCASE("validation") {
    PolyPhase phi = cubic();
    NewtonPolygon g = build_polygon(phi);
    CHECK_THROWS_AS(classify_boxes(PolyPhase::from_terms(1, {{{3}, 1}}), g, 0.1, chi),
                    ValidationError);
    CHECK_THROWS_AS(classify_boxes(PolyPhase(2), g, 0.1, chi), ValidationError);
    CHECK_THROWS_AS(classify_boxes(phi, g, 0.0, chi), ValidationError);
    CHECK_THROWS_AS(classify_boxes(phi, g, 0.1, chi, -1.0), ValidationError);
    CHECK_THROWS_AS(classify_boxes(phi, g, 0.1, chi, 2.0, 0), ValidationError);
    CHECK_THROWS_AS(classify_boxes(phi, g, 0.1, chi, 2.0, 41), ValidationError);
  }
}

TEST_CASE("active-box counts: constant per edge vs logarithmic growth") {
  Chi chi;  // two-sided

  SUBCASE("x1^3 + x2^3: the active edge count stays O(1) as eps shrinks") {
    PolyPhase phi = cubic();
    NewtonPolygon g = build_polygon(phi);
    std::vector<int> edge_counts, vertex_counts;
    for (int e : {-2, -4, -8, -12}) {
      ActiveCount c =
          count_active(classify_boxes(phi, g, std::ldexp(1.0, e), chi));
      edge_counts.push_back(c.edge);
      vertex_counts.push_back(c.vertex);
    }
    // ten dyadic decades of eps, same eight edge boxes active each time
    for (int c : edge_counts) CHECK(c == 8);
    // off-band vertex boxes along the strip j1 + j2 ~ log2(1/eps); pinned as
    // a determinism regression (includes the j <= 16 cap at the small end)
    CHECK(vertex_counts == std::vector<int>{32, 42, 62, 70});
  }

  SUBCASE("x1^2 x2^2: diagonal vertex, active count grows linearly in log(1/eps)") {
    PolyPhase phi = quartic_diag();
    NewtonPolygon g = build_polygon(phi);
    std::vector<int> counts;
    for (int L : {4, 8, 12, 16}) {
      ActiveCount c =
          count_active(classify_boxes(phi, g, std::ldexp(1.0, -L), chi));
      CHECK(c.edge == 0);  // no compact edges at all
      counts.push_back(c.vertex);
    }
    CHECK(counts == std::vector<int>{18, 26, 34, 42});
    // exactly linear: constant increment per four decades
    for (size_t i = 1; i < counts.size(); ++i)
      CHECK(counts[i] - counts[i - 1] == 8);

    // det Hess (x1 x2)^2 = -12 x1^2 x2^2 is nonpositive, so a one-sided
    // cutoff never activates anything
    ActiveCount one =
        count_active(classify_boxes(phi, g, 0.01, Chi(false)));
    CHECK(one.vertex == 0);
    CHECK(one.edge == 0);
  }
}

TEST_CASE("rescaling identities hold exactly and to quadrature accuracy") {
  ProductBump psi = ProductBump::standard(2);
  Chi chi;  // two-sided

  SUBCASE("vertex-cone box of the cubic") {
    PolyPhase phi = cubic();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.25, chi);
    RescaleReport r =
        rescale_check(phi, box_at(boxes, 3, 3), {0.0, 0.0}, 64.0, 0.25, chi, psi);
    CHECK(r.m == 9);
    CHECK(r.hessian_identity_exact);
    CHECK_FALSE(r.trivial);
    CHECK(r.rel_diff <= 1e-8);
    CHECK(r.ok);
  }

  SUBCASE("edge-band box of (x2 + x1^2)^2") {
    // k = 4 on the slope -1/2 edge rounds to the admissible box j = (3, 6)
    PolyPhase phi = cusp_square();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.0625, chi);
    RescaleReport r = rescale_check(phi, box_at(boxes, 3, 6), {0.0, 0.0}, 32.0,
                                    0.0625, chi, psi);
    CHECK(r.hessian_identity_exact);
    CHECK_FALSE(r.trivial);
    CHECK(r.rel_diff <= 1e-8);
    CHECK(r.ok);
  }

  SUBCASE("box fully outside the amplitude support is trivially zero") {
    PolyPhase phi = cubic();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.25, chi);
    ProductBump small = ProductBump::standard(2, 0.3);
    // box (0,0) covers |x_i| in [1/2, 2], disjoint from [-0.3, 0.3]^2
    RescaleReport r =
        rescale_check(phi, box_at(boxes, 0, 0), {0.0, 0.0}, 64.0, 0.25, chi, small);
    CHECK(r.trivial);
    CHECK(r.ok);
    CHECK(std::abs(r.lhs) <= 1e-12);
    CHECK(std::abs(r.rhs) <= 1e-12);
  }

  SUBCASE("validation") {
    PolyPhase phi = cubic();
    NewtonPolygon g = build_polygon(phi);
    std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.25, chi);
    const BoxClass& b = box_at(boxes, 3, 3);
    CHECK_THROWS_AS(rescale_check(phi, b, {0.0, 0.0}, 0.0, 0.25, chi, psi),
                    ValidationError);
    CHECK_THROWS_AS(rescale_check(phi, b, {0.0, 0.0}, 64.0, -1.0, chi, psi),
                    ValidationError);
    BoxClass neg = b;
    neg.j = {-1, 0};
    CHECK_THROWS_AS(rescale_check(phi, neg, {0.0, 0.0}, 64.0, 0.25, chi, psi),
                    ValidationError);
  }
}
