#pragma once

#include <string>
#include <vector>

#include "hesscut/bump.hpp"
#include "hesscut/common.hpp"
#include "hesscut/interval.hpp"
#include "hesscut/polyphase.hpp"
#include "hesscut/quadrature.hpp"

namespace hesscut {

// Rectangular working window for curve tracing (two variables only).
struct Window2 {
  Interval x1{-1.0, 1.0};
  Interval x2{-1.0, 1.0};
};

// One accepted point of a fold curve, parametrized by the cutoff value s.
struct FoldSample {
  double s = 0.0;
  double x1 = 0.0, x2 = 0.0;  // gamma(s)
  double t1 = 0.0, t2 = 0.0;  // dgamma/ds
  double f = 0.0;             // (Phi + xi.x)(gamma(s)), the reduced phase
  double fprime = 0.0;        // dPhi/du along the curve = f'(s)
  double density = 0.0;       // dphi/ds, the coarea density (positive)
  // restricted Hessian (Hess Phi - f' Hess u)(X1, X1), X1 the unit tangent
  // to the level set {u = s}; its sign is the restricted signature
  double restricted = 0.0;
};

// A traced branch of {dPhi_xi ^ du = 0} with u(gamma(s)) = s on a uniform
// s-grid. Invariants held at every accepted sample: |u(gamma(s)) - s| and the
// scaled cross product both below 1e-10.
struct FoldCurve {
  std::vector<FoldSample> samples;  // ascending in s
  int omega = 0;                    // +1 or -1, constant along the branch
  bool truncated = false;           // corrector failed before covering the range
  std::string diagnostic;           // where and why tracing stopped
};

// Predictor-corrector continuation: predictor along the curve tangent,
// corrector a damped Newton step on {cross(grad(Phi + xi.x), grad u) = 0,
// u = s}. Seeds come from a grid search over the window at mid-range s.
// Throws ValidationError when the continuation system is rank-deficient at a
// seed or the restricted Hessian degenerates along the curve; a corrector
// failure truncates the curve and records a diagnostic instead.
FoldCurve trace_curve(const PolyPhase& phi, const std::vector<double>& xi,
                      const PolyPhase& u, const Window2& window, double s_lo,
                      double s_hi, int n_samples = 33);

// All branches meeting the window at mid-range s (e.g. the two diagonal rays
// of the cubic reference phase), ordered by their seed coordinates.
std::vector<FoldCurve> trace_all_branches(const PolyPhase& phi,
                                          const std::vector<double>& xi,
                                          const PolyPhase& u,
                                          const Window2& window, double s_lo,
                                          double s_hi, int n_samples = 33);

// Recompute the coarea densities dphi/ds = |det(gamma', X1)| / sqrt|M(X1,X1)|
// (M = Hess Phi - f' Hess u) for an existing curve; also refreshed in place.
std::vector<double> curve_density(const PolyPhase& phi,
                                  const std::vector<double>& xi,
                                  const PolyPhase& u, FoldCurve& curve);

// Solve for the curve point at an arbitrary parameter value, warm-started
// from the nearest stored sample. Throws NumericError if the corrector fails.
FoldSample point_at(const PolyPhase& phi, const std::vector<double>& xi,
                    const PolyPhase& u, const FoldCurve& curve, double s);

// f''(s) through the determinant identity
//   f'' = sign(M(X1,X1)) * det(M) * (dphi/ds)^2,
// which must match the second difference of the sampled reduced phase.
double reduced_f2(const PolyPhase& phi, const std::vector<double>& xi,
                  const PolyPhase& u, const FoldCurve& curve, double s);

// Leading curve term of the reduced expansion:
//   (2 pi)^{1/2} sum_branches e^{i pi omega/4}
//       int e^{i f(s)/t} chi(s/eps) psi(gamma(s)) dphi(s),
// bands of chi with no curve branch contribute zero. The constant is the
// 1-D Fresnel one, (2 pi)^{1/2}.
Complex reduced_expansion0(const PolyPhase& phi, const std::vector<double>& xi,
                           const PolyPhase& u, const Chi& chi, double eps,
                           const ProductBump& psi, double t,
                           const Window2& window, const QuadConfig& cfg = {});

}  // namespace hesscut
