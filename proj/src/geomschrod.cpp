#include "hesscut/geomschrod.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hesscut/quadrature.hpp"

namespace hesscut {

namespace {

std::string point_str(const std::vector<double>& x) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// Beta-weighted monomial moments  w_m = sigma int_0^1 (1-s)^{sigma-1} s^m ds
//                                      = m! / prod_{j=1..m} (sigma + j).
std::vector<double> beta_moments(double sigma, int mmax) {
  std::vector<double> w(mmax + 1);
  w[0] = 1.0;
  for (int m = 1; m <= mmax; ++m) w[m] = w[m - 1] * m / (sigma + m);
  return w;
}

std::vector<Rational> beta_moments_exact(int sigma, int mmax) {
  std::vector<Rational> w(mmax + 1);
  mpz_class sig_fac;
  mpz_fac_ui(sig_fac.get_mpz_t(), sigma);
  for (int m = 0; m <= mmax; ++m) {
    mpz_class m_fac, ms_fac;
    mpz_fac_ui(m_fac.get_mpz_t(), m);
    mpz_fac_ui(ms_fac.get_mpz_t(), m + sigma);
    Rational v(m_fac * sig_fac, ms_fac);
    v.canonicalize();
    w[m] = v;
  }
  return w;
}

}  // namespace

// ------------------------------------------------------------ critical point

CriticalPoint critical_point(const PolyPhase& phi, const std::vector<Rational>& p) {
  const int n = phi.dim();
  if (static_cast<int>(p.size()) != n)
    throw ValidationError("critical_point: point dimension mismatch");
  for (int i = 0; i < n; ++i) {
    if (phi.partial(i).eval(p) != 0)
      throw ValidationError("critical_point: gradient does not vanish at the "
                            "given point (component " + std::to_string(i + 1) + ")");
  }
  CriticalPoint cp;
  cp.p = p;
  cp.det_exact = phi.hessian_det().eval(p);
  if (cp.det_exact == 0)
    throw ValidationError("critical_point: Hessian determinant vanishes (degenerate)");
  cp.det = cp.det_exact.get_d();
  auto H = phi.hessian();
  cp.hessian = Eigen::MatrixXd(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) cp.hessian(j, k) = H[j][k].eval(p).get_d();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cp.hessian);
  int pos = 0, neg = 0;
  for (int j = 0; j < n; ++j) {
    if (es.eigenvalues()(j) > 0) ++pos;
    else ++neg;
  }
  cp.signature = pos - neg;
  return cp;
}

// --------------------------------------------------------- weighted Hessians

// Restriction of a flat term list to s |-> sum_terms c prod_i (p_i + s d_i)^{e_i}.
static std::vector<double> restrict_terms_d(
    const std::vector<std::pair<std::vector<int>, double>>& terms,
    const std::vector<double>& p, const std::vector<double>& d) {
  std::vector<double> acc(1, 0.0);
  std::vector<double> mono, next;
  for (const auto& [e, c] : terms) {
    mono.assign(1, c);
    for (size_t i = 0; i < e.size(); ++i) {
      for (int rep = 0; rep < e[i]; ++rep) {
        next.assign(mono.size() + 1, 0.0);
        for (size_t m = 0; m < mono.size(); ++m) {
          next[m] += mono[m] * p[i];
          next[m + 1] += mono[m] * d[i];
        }
        mono.swap(next);
      }
    }
    if (acc.size() < mono.size()) acc.resize(mono.size(), 0.0);
    for (size_t m = 0; m < mono.size(); ++m) acc[m] += mono[m];
  }
  return acc;
}

static std::vector<std::pair<std::vector<int>, double>> flatten_terms(
    const PolyPhase& q) {
  std::vector<std::pair<std::vector<int>, double>> out;
  out.reserve(q.terms().size());
  for (const auto& [e, c] : q.terms()) out.emplace_back(e, c.get_d());
  return out;
}

Eigen::MatrixXd weighted_hessian(const PolyPhase& phi, const std::vector<double>& p,
                                 double sigma, const std::vector<double>& q) {
  const int n = phi.dim();
  if (sigma <= 0.0) throw ValidationError("weighted_hessian: sigma must be > 0");
  if (static_cast<int>(p.size()) != n || static_cast<int>(q.size()) != n)
    throw ValidationError("weighted_hessian: point dimension mismatch");
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = q[i] - p[i];
  auto H = phi.hessian();
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      auto sc = restrict_terms_d(flatten_terms(H[j][k]), p, d);
      auto w = beta_moments(sigma, static_cast<int>(sc.size()) - 1);
      double v = 0.0;
      for (size_t m = 0; m < sc.size(); ++m) v += sc[m] * w[m];
      M(j, k) = M(k, j) = v;
    }
  return M;
}

std::vector<std::vector<Rational>> weighted_hessian_exact(
    const PolyPhase& phi, const std::vector<Rational>& p, int sigma,
    const std::vector<Rational>& q) {
  const int n = phi.dim();
  if (sigma < 1) throw ValidationError("weighted_hessian_exact: sigma must be >= 1");
  if (static_cast<int>(p.size()) != n || static_cast<int>(q.size()) != n)
    throw ValidationError("weighted_hessian_exact: point dimension mismatch");
  auto H = phi.hessian();
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n, Rational(0)));
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      auto sc = H[j][k].restrict_segment(p, q);
      auto w = beta_moments_exact(sigma, static_cast<int>(sc.size()) - 1);
      Rational v(0);
      for (size_t m = 0; m < sc.size(); ++m) v += sc[m] * w[m];
      v.canonicalize();
      M[j][k] = M[k][j] = v;
    }
  return M;
}

std::vector<Rational> hessid1_residual(const PolyPhase& phi,
                                       const std::vector<Rational>& p,
                                       const std::vector<Rational>& q) {
  const int n = phi.dim();
  auto M1 = weighted_hessian_exact(phi, p, 1, q);
  std::vector<Rational> r(n, Rational(0));
  for (int j = 0; j < n; ++j) {
    PolyPhase pj = phi.partial(j);
    Rational v(0);
    for (int k = 0; k < n; ++k) v += M1[j][k] * (q[k] - p[k]);
    v -= pj.eval(q) - pj.eval(p);
    v.canonicalize();
    r[j] = v;
  }
  return r;
}

Rational hessid2_residual(const PolyPhase& phi, const std::vector<Rational>& p,
                          const std::vector<Rational>& q) {
  const int n = phi.dim();
  auto M2 = weighted_hessian_exact(phi, p, 2, q);
  Rational v(0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) v += (q[j] - p[j]) * M2[j][k] * (q[k] - p[k]);
  v -= 2 * (phi.eval(q) - phi.eval(p));
  for (int j = 0; j < n; ++j) v += 2 * phi.partial(j).eval(p) * (q[j] - p[j]);
  v.canonicalize();
  return v;
}

// ---------------------------------------------------------- SchrodOperator

double SchrodOperator::eval_terms(const std::vector<DTerm>& terms,
                                  const std::vector<double>& x) {
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.c;
    for (size_t i = 0; i < t.e.size(); ++i)
      for (int rep = 0; rep < t.e[i]; ++rep) v *= x[i];
    acc += v;
  }
  return acc;
}

Eigen::MatrixXd SchrodOperator::msigma(double sigma, const std::vector<double>& q) const {
  Eigen::MatrixXd M(n_, n_);
  std::vector<double> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = q[i] - p_[i];
  std::vector<double> acc, mono, next;
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k) {
      acc.assign(1, 0.0);
      for (const auto& t : hess_[j][k]) {
        mono.assign(1, t.c);
        for (int i = 0; i < n_; ++i) {
          for (int rep = 0; rep < t.e[i]; ++rep) {
            next.assign(mono.size() + 1, 0.0);
            for (size_t m = 0; m < mono.size(); ++m) {
              next[m] += mono[m] * p_[i];
              next[m + 1] += mono[m] * d[i];
            }
            mono.swap(next);
          }
        }
        if (acc.size() < mono.size()) acc.resize(mono.size(), 0.0);
        for (size_t m = 0; m < mono.size(); ++m) acc[m] += mono[m];
      }
      double v = 0.0, w = 1.0;
      for (size_t m = 0; m < acc.size(); ++m) {
        if (m > 0) w *= static_cast<double>(m) / (sigma + m);
        v += acc[m] * w;
      }
      M(j, k) = M(k, j) = v;
    }
  return M;
}

Eigen::MatrixXd SchrodOperator::m1(const std::vector<double>& q) const {
  return msigma(1.0, q);
}
Eigen::MatrixXd SchrodOperator::m2(const std::vector<double>& q) const {
  return msigma(2.0, q);
}

Eigen::MatrixXd SchrodOperator::a(const std::vector<double>& q) const {
  if (quadratic_) return a_const_;
  Eigen::MatrixXd M1 = msigma(1.0, q);
  Eigen::MatrixXd M2 = msigma(2.0, q);
  Eigen::MatrixXd M1inv = M1.inverse();
  return M1inv * M2 * M1inv;
}

double SchrodOperator::box0_phi(const std::vector<double>& q) const {
  if (quadratic_) return static_cast<double>(n_);
  Eigen::MatrixXd hess(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k)
      hess(j, k) = hess(k, j) = eval_terms(hess_[j][k], q);
  return (a(q) * hess).trace();
}

double SchrodOperator::eta_integrand(double s, const std::vector<double>& dir) const {
  std::vector<double> y(n_);
  for (int i = 0; i < n_; ++i) y[i] = p_[i] + s * dir[i];
  return (static_cast<double>(n_) - box0_phi(y)) / s;
}

double SchrodOperator::eta(const std::vector<double>& q) const {
  if (quadratic_) return 0.0;
  std::vector<double> dir(n_);
  for (int i = 0; i < n_; ++i) dir[i] = q[i] - p_[i];
  // Gauss-Legendre on geometric panels covering [1e-3, 1].
  const auto& [nodes, weights] = gauss_legendre(12);
  const int panels = 10;
  const double s0 = 1e-3;
  const double ratio = std::pow(1.0 / s0, 1.0 / panels);
  double total = 0.0;
  double lo = s0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    double hi = (pnl == panels - 1) ? 1.0 : lo * ratio;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (size_t i = 0; i < nodes.size(); ++i)
      total += half * weights[i] * eta_integrand(mid + half * nodes[i], dir);
    lo = hi;
  }
  // Tail [0, 1e-3]: the integrand extends continuously to s = 0; fit a
  // quadratic through s in {1, 2, 4} * 1e-3 and integrate it on [0, 1e-3].
  double g1 = eta_integrand(1e-3, dir);
  double g2 = eta_integrand(2e-3, dir);
  double g4 = eta_integrand(4e-3, dir);
  double gamma = ((g4 - g2) / 2.0 - (g2 - g1)) / 3.0;
  double beta = (g2 - g1) - 3.0 * gamma;
  double alpha = g1 - beta - gamma;
  total += s0 * (alpha + beta / 2.0 + gamma / 3.0);
  return total;
}

Eigen::VectorXd SchrodOperator::grad_eta(const std::vector<double>& q) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  if (quadratic_) return g;
  std::vector<double> y = q;
  for (int i = 0; i < n_; ++i) {
    const double h = std::max(std::abs(q[i]), 1.0) * 6e-4;
    const double x0 = q[i];
    y[i] = x0 + 2 * h;
    double fp2 = eta(y);
    y[i] = x0 + h;
    double fp1 = eta(y);
    y[i] = x0 - h;
    double fm1 = eta(y);
    y[i] = x0 - 2 * h;
    double fm2 = eta(y);
    y[i] = x0;
    g(i) = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
  }
  return g;
}

Eigen::VectorXd SchrodOperator::grad_eta_transport(const std::vector<double>& q) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  if (quadratic_) return g;
  // grad eta(q) = -int_0^1 grad(box0 Phi)(p + s (q-p)) ds: differentiating the
  // radial formula under the integral sign cancels the 1/s weight, so the
  // integrand is smooth on the whole of [0, 1].
  const auto& [nodes, weights] = gauss_legendre(12);
  const int panels = 4;
  std::vector<double> y(n_);
  for (int pnl = 0; pnl < panels; ++pnl) {
    double lo = static_cast<double>(pnl) / panels, hi = lo + 1.0 / panels;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (size_t i = 0; i < nodes.size(); ++i) {
      double s = mid + half * nodes[i];
      for (int c = 0; c < n_; ++c) y[c] = p_[c] + s * (q[c] - p_[c]);
      for (int c = 0; c < n_; ++c) {
        const double h = std::max(std::abs(y[c]), 1.0) * 6e-4;
        const double x0 = y[c];
        y[c] = x0 + 2 * h;
        double fp2 = box0_phi(y);
        y[c] = x0 + h;
        double fp1 = box0_phi(y);
        y[c] = x0 - h;
        double fm1 = box0_phi(y);
        y[c] = x0 - 2 * h;
        double fm2 = box0_phi(y);
        y[c] = x0;
        g(c) -= half * weights[i] * (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
      }
    }
  }
  return g;
}

Eigen::VectorXd SchrodOperator::b(const std::vector<double>& q) const {
  if (quadratic_) return Eigen::VectorXd::Zero(n_);
  return msigma(1.0, q).inverse() * grad_eta_transport(q);
}

double SchrodOperator::apply(const Eigen::VectorXd& grad_f,
                             const Eigen::MatrixXd& hess_f,
                             const std::vector<double>& q) const {
  return (a(q) * hess_f).trace() + b(q).dot(grad_f);
}

SchrodOperator build_box(const PolyPhase& phi, const std::vector<Rational>& p,
                         double box_half) {
  if (box_half <= 0.0) throw ValidationError("build_box: box_half must be > 0");
  SchrodOperator op;
  op.phi_ = phi;
  op.cp_ = critical_point(phi, p);
  op.n_ = phi.dim();
  op.box_half_ = box_half;
  op.quadratic_ = phi.degree() <= 2;
  op.p_.resize(op.n_);
  for (int i = 0; i < op.n_; ++i) op.p_[i] = p[i].get_d();

  auto H = phi.hessian();
  op.hess_.assign(op.n_, std::vector<std::vector<SchrodOperator::DTerm>>(op.n_));
  for (int j = 0; j < op.n_; ++j)
    for (int k = 0; k < op.n_; ++k)
      for (const auto& [e, c] : H[j][k].terms())
        op.hess_[j][k].push_back({e, c.get_d()});
  op.grad_.assign(op.n_, {});
  for (int j = 0; j < op.n_; ++j) {
    PolyPhase pj = phi.partial(j);  // named: terms() refers into this object
    for (const auto& [e, c] : pj.terms()) op.grad_[j].push_back({e, c.get_d()});
  }

  if (op.quadratic_) {
    op.a_const_ = op.cp_.hessian.inverse();
  } else {
    // Reject the box unless M_1 stays nondegenerate on its closure: |det|
    // must clear the tolerance at every sample, and det must not change sign
    // (M_1 is continuous, so a sign flip means a zero crossing in between).
    const int per_axis = op.n_ <= 2 ? 17 : 5;
    const double ref_sign = op.msigma(1.0, op.p_).determinant() > 0 ? 1.0 : -1.0;
    std::vector<int> idx(op.n_, 0);
    std::vector<double> x(op.n_);
    while (true) {
      for (int i = 0; i < op.n_; ++i)
        x[i] = op.p_[i] - box_half +
               2.0 * box_half * idx[i] / static_cast<double>(per_axis - 1);
      double det = op.msigma(1.0, x).determinant();
      if (std::abs(det) < 1e-10 || det * ref_sign < 0.0)
        throw ValidationError(
            "build_box: averaged Hessian degenerates inside the box, det = " +
            std::to_string(det) + " at " + point_str(x));
      int c = 0;
      while (c < op.n_ && ++idx[c] == per_axis) idx[c++] = 0;
      if (c == op.n_) break;
    }
  }
  return op;
}

// ----------------------------------------------------------------- PDE check

PdeResidual pde_residual(const SchrodOperator& op, double t,
                         const std::vector<double>& x) {
  if (t <= 0.0) throw ValidationError("pde_residual: t must be > 0");
  const int n = op.dim();
  const PolyPhase& phi = op.phase();
  std::vector<Rational> pr = op.critical().p;
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = pr[i].get_d();

  double theta = phi.eval_d(x) - phi.eval(pr).get_d();
  Eigen::VectorXd grad(n);
  for (int i = 0; i < n; ++i) grad(i) = phi.partial(i).eval_d(x);
  auto H = phi.hessian();
  Eigen::MatrixXd hess(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) hess(j, k) = H[j][k].eval_d(x);

  Eigen::MatrixXd A = op.a(x);
  Eigen::VectorXd B = op.b(x);

  const Complex I(0.0, 1.0);
  // All terms relative to u = t^{-n/2} e^{i theta / t}.
  Complex dt = -n / (2.0 * t) - I * theta / (t * t);
  Complex box = (I / t) * ((A * hess).trace() + B.dot(grad)) -
                (grad.dot(A * grad)) / (t * t);
  PdeResidual r;
  r.dt_term = dt;
  r.residual = dt - (I / 2.0) * box;
  r.rel = std::abs(r.residual) / std::abs(r.dt_term);
  return r;
}

// ------------------------------------------------------------------ adjoint

namespace {

// Exact path for constant-coefficient operators: (box*)^l = (sum A^{jk}
// d_j d_k)^l expands into a polynomial in the partial-derivative symbols,
// which is then applied to the product bump via per-axis jets.
using Symbol = std::map<std::vector<int>, double>;

Symbol symbol_power(const Eigen::MatrixXd& A, int n, int l) {
  Symbol cur;
  cur[std::vector<int>(n, 0)] = 1.0;
  for (int rep = 0; rep < l; ++rep) {
    Symbol next;
    for (const auto& [e, c] : cur)
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          double w = (j == k ? 1.0 : 2.0) * A(j, k);
          if (w == 0.0) continue;
          std::vector<int> e2 = e;
          ++e2[j];
          ++e2[k];
          next[e2] += c * w;
        }
    cur.swap(next);
  }
  return cur;
}

double apply_symbol(const Symbol& sym, const ProductBump& psi,
                    const std::vector<double>& x) {
  double acc = 0.0;
  for (const auto& [e, c] : sym) acc += c * psi.partial(e, x);
  return acc;
}

// Finite-difference path: nested 4th-order stencils on a single lattice
// x + h Z^n, memoizing every level so nested applications share evaluations.
class AdjointLattice {
 public:
  AdjointLattice(const SchrodOperator& op, const ProductBump& psi,
                 std::vector<double> anchor, int lmax)
      : op_(op), psi_(psi), anchor_(std::move(anchor)), n_(op.dim()),
        levels_(lmax + 1) {
    double scale = 1.0;
    for (double v : anchor_) scale = std::max(scale, std::abs(v));
    h_ = scale * std::pow(std::pow(2.0, -52.0), 1.0 / (2.0 * lmax + 4.0));
  }

  double h() const { return h_; }

  double level(int l, const std::vector<int>& off) {
    auto& memo = levels_[l];
    auto it = memo.find(off);
    if (it != memo.end()) return it->second;
    double v;
    if (l == 0) {
      v = psi_.value(at(off));
    } else {
      v = 0.0;
      for (int j = 0; j < n_; ++j)
        for (int k = j; k < n_; ++k) {
          double w = (j == k) ? 1.0 : 2.0;
          v += w * d1(j, [&](const std::vector<int>& o) {
            return d1(k, [&](const std::vector<int>& o2) {
              return coef_a(o2, j, k) * level(l - 1, o2);
            }, o);
          }, off);
        }
      for (int j = 0; j < n_; ++j)
        v -= d1(j, [&](const std::vector<int>& o) {
          return coef_b(o, j) * level(l - 1, o);
        }, off);
    }
    levels_[l].emplace(off, v);
    return v;
  }

 private:
  std::vector<double> at(const std::vector<int>& off) const {
    std::vector<double> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = anchor_[i] + h_ * off[i];
    return x;
  }

  template <class F>
  double d1(int j, F&& f, const std::vector<int>& off) {
    std::vector<int> o = off;
    o[j] = off[j] + 2;
    double fp2 = f(o);
    o[j] = off[j] + 1;
    double fp1 = f(o);
    o[j] = off[j] - 1;
    double fm1 = f(o);
    o[j] = off[j] - 2;
    double fm2 = f(o);
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h_);
  }

  double coef_a(const std::vector<int>& off, int j, int k) {
    auto it = amat_.find(off);
    if (it == amat_.end())
      it = amat_.emplace(off, op_.a(at(off))).first;
    return it->second(j, k);
  }

  double coef_b(const std::vector<int>& off, int j) {
    auto it = bvec_.find(off);
    if (it == bvec_.end()) it = bvec_.emplace(off, op_.b(at(off))).first;
    return it->second(j);
  }

  const SchrodOperator& op_;
  const ProductBump& psi_;
  std::vector<double> anchor_;
  int n_;
  double h_;
  std::vector<std::map<std::vector<int>, double>> levels_;
  std::map<std::vector<int>, Eigen::MatrixXd> amat_;
  std::map<std::vector<int>, Eigen::VectorXd> bvec_;
};

}  // namespace

double adjoint_apply(const SchrodOperator& op, const ProductBump& psi,
                     const std::vector<double>& x, int l) {
  if (l < 0) throw ValidationError("adjoint_apply: order must be >= 0");
  if (psi.dim() != op.dim())
    throw ValidationError("adjoint_apply: amplitude dimension mismatch");
  if (l == 0) return psi.value(x);
  if (op.constant_coefficient()) {
    // b = 0 and a constant, so box* = box = sum a^{jk} d_j d_k exactly.
    if (l > 6) throw BudgetError("adjoint_apply: order > 6 (jet budget)");
    return apply_symbol(symbol_power(op.a(x), op.dim(), l), psi, x);
  }
  if (l > 4)
    throw BudgetError("adjoint_apply: order > 4 exceeds the derivative-noise "
                      "budget for variable coefficients");
  AdjointLattice lat(op, psi, x, l);
  return lat.level(l, std::vector<int>(op.dim(), 0));
}

// ---------------------------------------------------------------- expansion

Complex ExpansionResult::value(double t) const {
  Complex acc(0.0, 0.0);
  double tp = 1.0;
  for (const Complex& c : coeffs) {
    acc += c * tp;
    tp *= t;
  }
  return acc;
}

double ExpansionResult::error_bound(double t) const {
  const double p = static_cast<double>(n) / (2.0 * k);
  return std::pow(t, N + 1) * std::pow(err_norm_a, 1.0 - p) * std::pow(err_norm_b, p);
}

namespace {

// L1 norm of (box*)^l psi over supp psi, exact constant-coefficient path:
// composite Simpson per axis with per-axis derivative tables (the bump
// factors, so each mixed partial is a product of 1-D derivatives).
double norm_exact(const SchrodOperator& op, const ProductBump& psi, int l) {
  const int n = op.dim();
  Symbol sym = symbol_power(op.a(std::vector<double>(n, 0.0)), n, l);
  const int M = 120;  // Simpson panels per axis (even)
  std::vector<std::vector<double>> coords(n);
  std::vector<std::vector<double>> wts(n);
  int dmax = 2 * l;
  // per-axis tables: deriv[axis][point][order]
  std::vector<std::vector<std::vector<double>>> tab(n);
  for (int i = 0; i < n; ++i) {
    Interval s = psi.support(i);
    double a = s.lo, b = s.hi, hstep = (b - a) / M;
    for (int j = 0; j <= M; ++j) {
      double xi = a + hstep * j;
      coords[i].push_back(xi);
      double w = (j == 0 || j == M) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      wts[i].push_back(w * hstep / 3.0);
      Jet jet = psi.axis(i).jet(xi - psi.center(i), dmax);
      std::vector<double> dv(dmax + 1);
      for (int d = 0; d <= dmax; ++d) dv[d] = jet.deriv(d);
      tab[i].push_back(dv);
    }
  }
  double total = 0.0;
  std::vector<int> idx(n, 0);
  while (true) {
    double v = 0.0;
    for (const auto& [e, c] : sym) {
      double prod = c;
      for (int i = 0; i < n; ++i) prod *= tab[i][idx[i]][e[i]];
      v += prod;
    }
    double w = psi.amp();
    for (int i = 0; i < n; ++i) w *= wts[i][idx[i]];
    total += w * std::abs(v);
    int c = 0;
    while (c < n && ++idx[c] == static_cast<int>(coords[c].size())) idx[c++] = 0;
    if (c == n) break;
  }
  return total;
}

// Variable-coefficient path: evaluate (box*)^l psi on a Simpson grid whose
// nodes sit on one shared finite-difference lattice anchored at p, so all
// nested stencil evaluations are memoized once.
double norm_fd(const SchrodOperator& op, const ProductBump& psi, int l) {
  const int n = op.dim();
  std::vector<Rational> pr = op.critical().p;
  std::vector<double> anchor(n);
  for (int i = 0; i < n; ++i) anchor[i] = pr[i].get_d();
  AdjointLattice lat(op, psi, anchor, l);
  const double h = lat.h();
  // Simpson nodes every K lattice steps (about 25 nodes per axis); stencil
  // points in between still land on the shared lattice, so they memoize.
  std::vector<std::vector<int>> offs(n);
  std::vector<double> step(n);
  for (int i = 0; i < n; ++i) {
    Interval s = psi.support(i);
    int K = std::max(1, static_cast<int>(std::floor(s.width() / 24.0 / h)));
    int lo = static_cast<int>(std::floor((s.lo - anchor[i]) / h));
    int hi = static_cast<int>(std::ceil((s.hi - anchor[i]) / h));
    int m = (hi - lo + K - 1) / K;
    if (m % 2) ++m;  // Simpson needs an even panel count
    hi = lo + m * K;
    for (int j = lo; j <= hi; j += K) offs[i].push_back(j);
    step[i] = K * h;
  }
  double total = 0.0;
  std::vector<int> idx(n, 0);
  std::vector<int> off(n);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      int j = idx[i], M = static_cast<int>(offs[i].size()) - 1;
      double wi = (j == 0 || j == M) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      w *= wi * step[i] / 3.0;
      off[i] = offs[i][j];
    }
    total += w * std::abs(lat.level(l, off));
    int c = 0;
    while (c < n && ++idx[c] == static_cast<int>(offs[c].size())) idx[c++] = 0;
    if (c == n) break;
  }
  return total;
}

}  // namespace

ExpansionResult expansion(const SchrodOperator& op, const ProductBump& psi, int N,
                          int k) {
  const int n = op.dim();
  if (N < 0) throw ValidationError("expansion: N must be >= 0");
  if (2 * k <= n)
    throw ValidationError("expansion: need k > n/2 for the error bound");
  const int budget = op.constant_coefficient() ? 6 : 4;
  if (N + k + 1 > budget)
    throw BudgetError("expansion: N + k + 1 = " + std::to_string(N + k + 1) +
                      " exceeds the adjoint order budget " + std::to_string(budget));
  ExpansionResult r;
  r.N = N;
  r.k = k;
  r.n = n;
  const CriticalPoint& cp = op.critical();
  r.prefactor = std::pow(2.0 * M_PI, 0.5 * n) / std::sqrt(std::abs(cp.det)) *
                std::exp(Complex(0.0, M_PI * cp.signature / 4.0));
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = cp.p[i].get_d();
  Complex half_i(0.0, 0.5), fac(1.0, 0.0);
  double lfac = 1.0;
  for (int l = 0; l <= N; ++l) {
    if (l > 0) {
      fac *= half_i;
      lfac *= l;
    }
    r.coeffs.push_back(r.prefactor * fac * adjoint_apply(op, psi, p, l) / lfac);
  }
  if (op.constant_coefficient()) {
    r.err_norm_a = norm_exact(op, psi, N + 1);
    r.err_norm_b = norm_exact(op, psi, N + k + 1);
  } else {
    r.err_norm_a = norm_fd(op, psi, N + 1);
    r.err_norm_b = norm_fd(op, psi, N + k + 1);
  }
  return r;
}

}  // namespace hesscut
