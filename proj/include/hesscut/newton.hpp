#pragma once

#include <array>
#include <string>
#include <vector>

#include "hesscut/polyphase.hpp"

namespace hesscut {

struct Vec2i {
  int k1 = 0, k2 = 0;
  bool operator==(const Vec2i& o) const { return k1 == o.k1 && k2 == o.k2; }
};

// Compact edge of the Newton polygon with its analytic data.
struct EdgeData {
  Vec2i a, b;              // endpoints, ordered by increasing k1
  Rational beta_sq;        // edge slope is -beta^2 (beta_sq = dk1 / -dk2 > 0)
  Rational newton_distance;  // diagonal parameter of the extended edge line
  PolyPhase edge_poly;     // sum of the phase terms supported on the edge
  bool touches_axis1 = false;  // endpoint with k2 == 0 (the k1-axis)
  bool touches_axis2 = false;  // endpoint with k1 == 0 (the k2-axis)
};

// Newton polygon of a 2-variable phase: convex hull of the union of
// quadrants [k1,inf) x [k2,inf) over the Taylor support.
struct NewtonPolygon {
  std::vector<Vec2i> support;   // full support, graded-lex order
  std::vector<Vec2i> vertices;  // extreme points, increasing k1 / decreasing k2
  Rational distance;            // Newton distance: min t with (t,t) in the polygon
  bool diagonal_at_vertex = false;
};

NewtonPolygon build_polygon(const PolyPhase& p);

// 1 when the diagonal meets the polygon at a vertex (the log-power case),
// else 0
int diagonal_class(const NewtonPolygon& g);

std::vector<EdgeData> edge_data(const PolyPhase& p, const NewtonPolygon& g);

// ---------------------------------------------------------- fold checking

enum class Region { OffAxes, NearAxis1, NearAxis2 };

std::string region_name(Region r);

// Regions applicable to an edge polynomial: off-axes always; the near-axis
// strips when the edge touches the corresponding axis.
std::vector<Region> applicable_regions(const EdgeData& e);

struct WhitneyParams {
  double box_half = 2.0;    // checks run on [-box_half, box_half]^2
  double margin = 0.125;    // exclusion strip half-width around the axes
  double density = 32.0;    // root-search grid lines per unit length
  double tau1 = 1e-8;       // scaled threshold for |grad det Hess| at zeros
  double tau2 = 1e-8;       // scaled threshold for differential injectivity
};

struct FoldWitness {
  double x1 = 0.0, x2 = 0.0;
  std::string defect;  // which hypothesis failed and by how much
};

enum class FoldVerdict { Fold, Violation, Inconclusive };

struct FoldReport {
  FoldVerdict verdict = FoldVerdict::Inconclusive;
  bool vacuous = false;        // no singular points in the region (certified)
  long roots_checked = 0;
  double min_grad_scaled = 0.0;  // min over roots of |grad h| / scale
  double min_inj_scaled = 0.0;   // min over roots of |Hess * T| / scale
  std::vector<FoldWitness> witnesses;
};

// Checks the Whitney fold hypotheses for the singular set {det Hess f = 0}
// of a 2-variable polynomial f on the given region: at each found zero z,
// (a) |grad(det Hess f)(z)| above tau1 * scale (the zero set is a regular
//     curve), and
// (b) |Hess f(z) . T| above tau2 * scale for T spanning the tangent of the
//     zero curve (the fold differential stays injective).
// When no zeros are found, interval subdivision certifies nonvanishing of
// det Hess f on the region (vacuous fold) or the report is inconclusive.
FoldReport whitney_check(const PolyPhase& f, Region region,
                         const WhitneyParams& params = {});

}  // namespace hesscut
