#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hesscut/common.hpp"
#include "hesscut/quadrature.hpp"

namespace hesscut {

// One instance of the explicit 1-D estimate: a C^2 phase f on [a, b], a
// continuous comparison function g, an amplitude omega, and the certified
// constants of the two hypotheses
//   |f''(s) - g(s)| <= C |f'(s)|      (approximate-second-derivative)
//   delta <= |g(s)| <= K delta        (comparability)
// under which  |int_a^b e^{i f(s)/t} omega(s) ds|  obeys the explicit bound
// computed by estprop_rhs for every t > 0.
struct VdcInstance {
  std::function<double(double)> f, fprime, fsecond, g;
  std::function<double(double)> omega, omega_deriv;
  double a = 0.0, b = 1.0;

  // certified constants and amplitude norms; filled by certify(), or set
  // directly when exercising the bound formula alone
  double C = 0.0, K = 1.0, delta = 1.0;
  double norm_inf = 0.0;  // sup |omega|
  double norm_d1 = 0.0;   // L1 norm of omega'
  double norm_1 = 0.0;    // L1 norm of omega
  bool certified = false;
};

struct CertReport {
  bool ok = false;
  std::string detail;  // which hypothesis failed and where
  double C = 0.0, K = 1.0, delta = 0.0;
};

// Certify the two hypotheses by dense sampling (4096 points per unit length)
// and fill the instance's constants with 10% safety inflation; amplitude
// norms come from adaptive quadrature (relative tolerance 1e-8) and a dense
// sup scan. K >= 1 always (forced by the comparability inequality itself);
// C = 0 is legitimate and occurs when f'' == g.
CertReport certify(VdcInstance& inst, const QuadConfig& cfg = {});

// The explicit right-hand side
//   (t/delta)^{1/2} (12 ||omega||_inf + 4 ||omega'||_1 + 2 C sqrt(K) ||omega||_1),
// a pure formula on the stored fields. Monotone increasing in each norm, C,
// K, and t; decreasing in delta.
double estprop_rhs(const VdcInstance& inst, double t);

struct VdcPoint {
  double t = 0.0, lhs = 0.0, rhs = 0.0, ratio = 0.0;
  // true when 2 C sqrt(K t / delta) <= 1, the regime the proof reduces to;
  // outside it the trivial L1 bound is the binding one and the point is
  // flagged rather than failed
  bool wlog_regime = true;
};

struct VdcReport {
  bool hypotheses_ok = false;
  std::string hypothesis_failure;
  bool violation = false;  // some LHS exceeded its RHS (never, if certified)
  double max_ratio = 0.0;
  int n_flagged = 0;  // points outside the wlog regime
  std::vector<VdcPoint> points;
};

// Evaluate the left side by oscillatory quadrature on each grid t and compare
// with estprop_rhs. Certification failure is reported in the report, separate
// from any inequality violation.
VdcReport estprop_verify(VdcInstance& inst, const std::vector<double>& t_grid,
                         const QuadConfig& cfg = {});

struct EsetResult {
  bool connected = false;  // the sampled sublevel set is a single run
  int runs = 0;
  double length = 0.0;     // sampled measure of {|f'| <= eps}
  double bound = 0.0;      // 2 eps / (delta - C eps) + grid slack
  bool claim_valid = false;  // hypotheses certified and eps < delta / C
};

// Structure of E_eps = {s in [a,b] : |f'(s)| <= eps} on the certification
// grid. The connectivity claim is only made in the certified regime
// eps < delta / C (always, when C = 0).
EsetResult eset_structure(VdcInstance& inst, double eps,
                          const QuadConfig& cfg = {});

// One member of a family for the sup-interpolation check: a function on
// (0, infinity) declared to satisfy |f(t)| <= A t^{-n/2} and
// |f^(k)(t)| <= B t^{-n/2}.
struct SupInterpInstance {
  std::function<double(double)> f;
  double A = 1.0, B = 1.0;
};

struct SupInterpReport {
  double max_constant = 0.0;
  std::vector<double> constants;  // sup|f| / (A^{1-n/2k} B^{n/2k}) per member
};

// Empirical check of ||f||_inf <= const * A^{1-n/(2k)} B^{n/(2k)} on a log
// grid of t; requires 2k > n.
SupInterpReport sup_interp_check(const std::vector<SupInterpInstance>& family,
                                 int n, int k, double t_lo = 1e-4,
                                 double t_hi = 1e4, int n_grid = 20000);

}  // namespace hesscut
