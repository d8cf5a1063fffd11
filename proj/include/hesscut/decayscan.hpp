#pragma once

#include <array>
#include <string>
#include <vector>

#include "hesscut/bump.hpp"
#include "hesscut/newton.hpp"
#include "hesscut/polyphase.hpp"
#include "hesscut/quadrature.hpp"

namespace hesscut {

// ------------------------------------------------------------- sup over xi
//
// The decay quantity is sup over the linear tilt xi of
//   | int exp(i lambda (Phi(x) + xi.x)) chi(eps^{-1} det Hess Phi) psi dx |.
// The sup runs over a compact box: outside the range of -grad Phi on supp psi
// the phase has no critical point and the integral is negligible, so a
// modest margin around that range suffices.

struct XiBox {
  Interval xi1{-1.0, 1.0}, xi2{-1.0, 1.0};
};

XiBox default_xi_box(const PolyPhase& phi, const ProductBump& psi,
                     double margin = 0.5);

struct ScanRecord {
  double lambda = 0.0, eps = 0.0;
  std::array<double, 2> xi_star{0.0, 0.0};  // argmax tilt
  double sup_val = 0.0;                     // |I| at the argmax (converged)
  double val_at_zero = 0.0;                 // |I| at xi = 0
  long nodes_used = 0;                      // total quadrature nodes spent
  double est_error = 0.0;                   // error estimate at the argmax
};

struct ScanConfig {
  int coarse = 17;  // coarse grid points per xi axis
  int refine = 9;   // refinement grid points per axis
  int passes = 2;   // local refinement passes around the running argmax
  QuadConfig quad;
};

ScanRecord sup_over_xi(const PolyPhase& phi, double lambda, double eps,
                       const Chi& chi, const ProductBump& psi, const XiBox& box,
                       const ScanConfig& cfg = {});

// Full (lambda, eps) sweep; records in row-major (lambda outer) order.
std::vector<ScanRecord> scan_grid(const PolyPhase& phi,
                                  const std::vector<double>& lambdas,
                                  const std::vector<double>& epss,
                                  const Chi& chi, const ProductBump& psi,
                                  const XiBox& box, const ScanConfig& cfg = {});

// ------------------------------------------------------------ decay fitting

struct FitResult {
  double rho_lambda = 0.0, se_lambda = 0.0;  // slope of log sup in log lambda
  double rho_eps = 0.0, se_eps = 0.0;        // slope of log sup in log eps
  double rms_power = 0.0;   // residual RMS of the log-log power-law fit
  // compensated quantity z = sup * lambda * sqrt(eps) regressed on log(1/eps)
  double log_slope = 0.0, log_slope_se = 0.0, log_slope_tstat = 0.0;
  double rms_comp_const = 0.0;  // RMS of z about its mean (no log term)
  double rms_comp_log = 0.0;    // RMS of z about the log(1/eps) fit
  double comp_ratio = 0.0;      // max z / min z over the records
  int s_hint = 0;               // caller's expected log power (0 or 1), echoed
};

// Least squares of log sup_val on (1, log lambda, log eps), then the
// compensated regression. Requires >= 6 distinct values per axis spanning
// >= 2 dyadic decades; throws ValidationError otherwise (including records
// with nonpositive sup_val, which have no log).
FitResult fit_decay(const std::vector<ScanRecord>& records, int s_hint = 0);

// ------------------------------------------- degenerate-profile experiment
//
// For the phase (x2 + x1^2)^2 with xi = 0 and eps = lambda^{-1/2}, the exact
// substitution x2 -> lambda^{-1/2} x2 - x1^2 shows
//   I(lambda) = lambda^{-1/2} int e^{i y^2} chi(8 y)
//                 psi(x1, lambda^{-1/2} y - x1^2) dy dx1,
// so |I| * lambda^{1/2} tends to the product of two 1-D integrals and the
// cutoff does not improve the lambda^{-1/2} decay of the uncut integral.

struct ProfileRow {
  double lambda = 0.0, eps = 0.0;
  double absval = 0.0;       // |I(lambda)|
  double compensated = 0.0;  // |I| * lambda^{1/2}
};

struct ProfileResult {
  std::vector<ProfileRow> rows;
  double factor_chi = 0.0;  // |int e^{i y^2} chi(8 y) dy|
  double factor_psi = 0.0;  // int psi(x1, -x1^2) dx1
  double target = 0.0;      // product of the two factors
  double fitted_exponent = 0.0;  // LS slope of log |I| against log lambda
};

ProfileResult counterexample_profile(const std::vector<double>& lambdas,
                                     const Chi& chi, const ProductBump& psi,
                                     const QuadConfig& cfg = {});

// Exact finite-lambda substitution identity above, checked by dual
// quadrature; returns the relative difference of the two sides.
double counterexample_substitution_diff(double lambda, const Chi& chi,
                                        const ProductBump& psi,
                                        const QuadConfig& cfg = {});

// ------------------------------------------------------- bi-dyadic boxes
//
// Box j = (j1, j2) covers |x_i| in [2^{-j_i - 1}, 2^{-j_i + 1}] through the
// annulus window eta. Classification: a box is vertex(alpha) when the
// rescaled phase 2^{m} Phi(2^{-j1} x1, 2^{-j2} x2) is dominated by the alpha
// monomial on the reference annulus [1/2, 2]^2 (relative remainder < 0.1,
// term-wise interval bound), edge(l) when the band condition
// |beta_l^{-1} j1 - beta_l j2| <= C_edge holds (one-sided when the edge
// meets an axis, since no vertex estimate covers the on-axis side), and
// negligible otherwise. Vertex dominance takes precedence.

enum class BoxKind { Vertex, Edge, Negligible };

struct BoxClass {
  std::array<int, 2> j{0, 0};
  BoxKind kind = BoxKind::Negligible;
  Vec2i alpha{};         // dominating vertex (kind == Vertex)
  int edge_index = -1;   // index into edge_data(phi, g) (kind == Edge)
  double rel_remainder = 0.0;  // dominance defect of the best vertex
  long m = 0;            // rescale prefactor exponent: min_beta beta . j
  double band = 0.0;     // predicted active cutoff scale 2^{-2(m - j1 - j2)}
  bool active = false;   // box u-range meets the cutoff bands at this eps
  std::string descriptor;
};

std::vector<BoxClass> classify_boxes(const PolyPhase& phi,
                                     const NewtonPolygon& g, double eps,
                                     const Chi& chi, double c_edge = 2.0,
                                     int j_max = 16);

struct ActiveCount {
  int vertex = 0, edge = 0, negligible = 0;
  int total() const { return vertex + edge + negligible; }
};

ActiveCount count_active(const std::vector<BoxClass>& boxes);

// ---------------------------------------------------- rescaling identities
//
// (a) change of variables: the box-windowed integral equals 2^{-j1-j2} times
//     the integral of the rescaled phase 2^{-m} Phi_j with matching rescaled
//     cutoff argument and amplitude over the reference annulus;
// (b) det Hess Phi_j = 2^{2(m - j1 - j2)} u(2^{-j1} x1, 2^{-j2} x2) with
//     u = det Hess Phi, an exact identity of rational polynomials.

struct RescaleReport {
  std::array<int, 2> j{0, 0};
  long m = 0;
  bool hessian_identity_exact = false;
  Complex lhs{}, rhs{};   // box integral and scaled rescaled integral
  double rel_diff = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|) when nontrivial
  bool trivial = false;   // both sides below the absolute floor
  bool ok = false;
  long nodes = 0;
};

RescaleReport rescale_check(const PolyPhase& phi, const BoxClass& box,
                            const std::array<double, 2>& xi, double lambda,
                            double eps, const Chi& chi, const ProductBump& psi,
                            const QuadConfig& cfg = {});

// Smooth window supported on [1/2, 2], normalized so that for every v > 0
// the dyadic sum over k of annulus_eta(2^k v) is exactly 1.
double annulus_eta(double v);

}  // namespace hesscut
