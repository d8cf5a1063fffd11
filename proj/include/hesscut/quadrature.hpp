#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hesscut/bump.hpp"
#include "hesscut/common.hpp"
#include "hesscut/interval.hpp"
#include "hesscut/polyphase.hpp"

namespace hesscut {

struct QuadConfig {
  int gl_order = 12;        // panel Gauss-Legendre order
  int gl_order_check = 18;  // comparison order for the convergence estimate
  double osc_budget = 3.141592653589793;  // max phase change per panel (radians)
  double cutoff_budget = 1.0;  // max change of the scaled cutoff argument per panel
  double rel_tol = 1e-8;
  double abs_tol = 1e-13;
  int max_passes = 6;  // budget-halving refinement passes
  long max_nodes = 80000000;
  double lambda_cap_2d = 4096.0;   // refuse higher frequencies (2-D)
  double lambda_cap_1d = 65536.0;  // refuse higher frequencies (1-D)
  bool parallel = true;  // OpenMP panel loop; false = serial reference path
};

struct IntegralValue {
  Complex value{};
  double est_error = 0.0;  // |base-order - check-order| on the accepted pass
  long nodes = 0;
  int passes = 1;
  bool converged = true;
};

// ---------------------------------------------------------------- 2-D case
//
// I(lambda, eps, xi) = int exp(i lambda (Phi(x) + xi.x)) chi(eps^{-1} u(x))
//                          psi(x) [extra_amp(x)] dx
//
// The cutoff factor is present iff chi != nullptr. Panels are axis-aligned
// boxes sized by per-axis oscillation and cutoff budgets (interval bounds of
// the partials), and panels whose u-range certainly misses the active bands
// eps*[1,2] (and the mirror band) are culled before evaluation.

struct Osc2DSpec {
  FlatPoly2 phase;   // Phi
  FlatPoly2 d1, d2;  // partials of Phi (planning bounds)
  double lambda = 1.0;
  double xi1 = 0.0, xi2 = 0.0;
  const Chi* chi = nullptr;
  FlatPoly2 cutoff;  // u (used when chi != nullptr)
  FlatPoly2 u1, u2;  // partials of u
  double eps = 0.0;
  const ProductBump* psi = nullptr;  // standard amplitude; nullptr = 1
  std::function<double(double, double)> extra_amp;  // optional extra factor
  double extra_amp_scale = 0.0;  // feature length of extra_amp (0 = none)
  Interval dom1{-8.0, 8.0}, dom2{-8.0, 8.0};  // domain clip
};

Osc2DSpec make_osc2d(const PolyPhase& phi, double lambda, double xi1, double xi2,
                     const Chi* chi, const PolyPhase* u, double eps,
                     const ProductBump* psi);

IntegralValue osc2d(const Osc2DSpec& spec, const QuadConfig& cfg = {});

// Shared-plan evaluation over a xi grid (the scan hot path). Returns values
// in row-major order: out[i * xi2s.size() + j] for (xi1s[i], xi2s[j]). The
// panel plan covers the whole xi box, and the reduction order is fixed, so
// results are bit-identical for any thread count.
std::vector<Complex> osc2d_xi_grid(const Osc2DSpec& base,
                                   const std::vector<double>& xi1s,
                                   const std::vector<double>& xi2s,
                                   const QuadConfig& cfg = {},
                                   long* nodes_out = nullptr);

// Gaussian-regime integral int t^{-1} exp(i (Phi(x) - Phi(p)) / t) psi dx in
// two variables (t^{-n/2} with n = 2), no cutoff.
IntegralValue nondeg_integral(const PolyPhase& phi, const std::vector<double>& p,
                              double t, const ProductBump& psi,
                              const QuadConfig& cfg = {});

// ---------------------------------------------------------------- 1-D case

struct Osc1DSpec {
  std::function<double(double)> f;       // phase
  std::function<double(double)> fprime;  // derivative of f, used for planning
  std::function<double(double)> w;       // amplitude
  double a = 0.0, b = 1.0;
  double t = 1.0;  // integrand exp(i f(s) / t) w(s)
};

IntegralValue osc1d(const Osc1DSpec& spec, const QuadConfig& cfg = {});

// plain adaptive integral of w over [a,b] (no oscillation), with the same
// convergence policy; used for norms of amplitudes
double integrate1d(const std::function<double(double)>& w, double a, double b,
                   const QuadConfig& cfg = {});

// Gauss-Legendre rule on [-1,1] (nodes, weights), cached per order
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

}  // namespace hesscut
