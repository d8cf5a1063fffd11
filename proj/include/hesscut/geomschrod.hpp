#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hesscut/bump.hpp"
#include "hesscut/common.hpp"
#include "hesscut/polyphase.hpp"

namespace hesscut {

// Data of a nondegenerate critical point of a polynomial phase.
struct CriticalPoint {
  std::vector<Rational> p;  // exact location
  Eigen::MatrixXd hessian;  // plain Hessian at p
  Rational det_exact;       // exact determinant of the Hessian at p
  double det = 0.0;
  int signature = 0;  // positive minus negative eigenvalue count
};

// Validates that p is a critical point (exactly, in rational arithmetic) and
// that the Hessian there is nondegenerate (exact determinant != 0).
CriticalPoint critical_point(const PolyPhase& phi, const std::vector<Rational>& p);

// Weighted Hessian along the segment from p to q:
//   M_sigma(q) = sigma * int_0^1 (1-s)^{sigma-1} Hess Phi(p + s(q-p)) ds.
// For polynomial phases each entry restricts to a polynomial in s, and the
// weight integrates monomials to  s^m -> m! / prod_{j=1..m} (sigma + j),
// so the result is exact up to rounding for every real sigma > 0.
Eigen::MatrixXd weighted_hessian(const PolyPhase& phi, const std::vector<double>& p,
                                 double sigma, const std::vector<double>& q);

// Exact rational variant for integer sigma >= 1 (the weights are rational).
std::vector<std::vector<Rational>> weighted_hessian_exact(
    const PolyPhase& phi, const std::vector<Rational>& p, int sigma,
    const std::vector<Rational>& q);

// The two integration-by-parts identities tying the weighted Hessians to the
// phase, in the form valid for every base point (the boundary term grad
// Phi(p) is kept; at a critical point it vanishes and the displays collapse
// to the familiar ones). Both return exact residuals, identically zero:
//   M_1(q) (q-p) - [grad Phi(q) - grad Phi(p)]
//   (q-p)^T M_2(q) (q-p) - 2 [Phi(q) - Phi(p) - grad Phi(p).(q-p)]
std::vector<Rational> hessid1_residual(const PolyPhase& phi,
                                       const std::vector<Rational>& p,
                                       const std::vector<Rational>& q);
Rational hessid2_residual(const PolyPhase& phi, const std::vector<Rational>& p,
                          const std::vector<Rational>& q);

// ------------------------------------------------------------- the operator

// Second-order operator  box f = tr(a grad^2 f) + b . grad f  with
//   a(x) = M_1(x)^{-1} M_2(x) M_1(x)^{-1},   b(x) = M_1(x)^{-1} grad eta(x),
//   eta(q) = int_0^1 [ n - box0 Phi(p + s(q-p)) ] ds / s,
// built around a nondegenerate critical point p. The radial integral for eta
// uses Gauss-Legendre panels on [1e-3, 1] plus a quadratic extrapolation of
// the integrand from s in {1e-3, 2e-3, 4e-3} down to 0 (the integrand
// vanishes at s = 0). grad eta uses 4th-order central differences with step
// h = max(|x|, 1) * 6e-4.
class SchrodOperator {
 public:
  int dim() const { return n_; }
  const CriticalPoint& critical() const { return cp_; }
  const PolyPhase& phase() const { return phi_; }
  double box_half() const { return box_half_; }
  bool constant_coefficient() const { return quadratic_; }

  Eigen::MatrixXd m1(const std::vector<double>& q) const;
  Eigen::MatrixXd m2(const std::vector<double>& q) const;
  Eigen::MatrixXd a(const std::vector<double>& q) const;
  Eigen::VectorXd b(const std::vector<double>& q) const;
  double eta(const std::vector<double>& q) const;
  Eigen::VectorXd grad_eta(const std::vector<double>& q) const;
  // analytically interchanged form -int_0^1 grad(box0 Phi)(p + s(q-p)) ds;
  // equal to grad_eta up to quadrature error, cheaper inside nested loops
  Eigen::VectorXd grad_eta_transport(const std::vector<double>& q) const;
  double box0_phi(const std::vector<double>& q) const;

  // box applied to a scalar function given its gradient and Hessian at q
  double apply(const Eigen::VectorXd& grad_f, const Eigen::MatrixXd& hess_f,
               const std::vector<double>& q) const;

 private:
  friend SchrodOperator build_box(const PolyPhase&, const std::vector<Rational>&,
                                  double);
  PolyPhase phi_;
  CriticalPoint cp_;
  int n_ = 0;
  double box_half_ = 1.0;
  bool quadratic_ = false;
  std::vector<double> p_;
  Eigen::MatrixXd a_const_;  // constant-coefficient (quadratic-phase) shortcut
  // Hessian entries and gradient as flat double term lists (general n)
  struct DTerm {
    std::vector<int> e;
    double c;
  };
  std::vector<std::vector<std::vector<DTerm>>> hess_;  // n x n
  std::vector<std::vector<DTerm>> grad_;
  static double eval_terms(const std::vector<DTerm>& t, const std::vector<double>& x);
  Eigen::MatrixXd msigma(double sigma, const std::vector<double>& q) const;
  double eta_integrand(double s, const std::vector<double>& dir) const;
};

// Validates nondegeneracy of p and of M_1 on the closed box p +- box_half
// (componentwise), sampling on a 17^n grid with tolerance 1e-10 on |det M_1|.
SchrodOperator build_box(const PolyPhase& phi, const std::vector<Rational>& p,
                         double box_half = 1.0);

// [d/dt - (i/2) box] applied to u = t^{-n/2} e^{i (Phi - Phi(p))/t}, reported
// relative to u (both returned values are divided by u).
struct PdeResidual {
  Complex residual{};
  Complex dt_term{};
  double rel = 0.0;  // |residual| / |dt_term|
};
PdeResidual pde_residual(const SchrodOperator& op, double t,
                         const std::vector<double>& x);

// (box*)^l psi at x, where box* g = sum_jk d_j d_k (a^{jk} g) - sum_j d_j (b^j g)
// is the Lebesgue adjoint. Quadratic phases use an exact constant-coefficient
// path (derivative-symbol polynomial applied to bump jets), valid to l = 6;
// other phases use nested 4th-order stencils on a memoized lattice, capped at
// l = 4 by the derivative-noise budget.
double adjoint_apply(const SchrodOperator& op, const ProductBump& psi,
                     const std::vector<double>& x, int l);

// ------------------------------------------------------------ the expansion

struct ExpansionResult {
  std::vector<Complex> coeffs;  // c_0..c_N, prefactor included
  Complex prefactor{};          // (2 pi)^{n/2} e^{i pi omega/4} mu(p)/sqrt|det|
  double err_norm_a = 0.0;      // int |(box*)^{N+1} psi|
  double err_norm_b = 0.0;      // int |(box*)^{N+k+1} psi|
  int N = 0, k = 0, n = 0;

  // sum of c_l t^l (the e^{i Phi(p)/t} rotation is the caller's)
  Complex value(double t) const;
  // t^{N+1} * norm_a^{1 - n/2k} * norm_b^{n/2k}
  double error_bound(double t) const;
};

// Coefficients of the small-t expansion of t^{-n/2} int e^{i(Phi-Phi(p))/t} psi:
//   c_l = prefactor * (i/2)^l (box*)^l psi(p) / l!.
// The prefactor constant is the Fresnel one, (2 pi)^{n/2}; requires k > n/2
// and N + k + 1 within the adjoint budget for the phase.
ExpansionResult expansion(const SchrodOperator& op, const ProductBump& psi, int N,
                          int k);

}  // namespace hesscut
