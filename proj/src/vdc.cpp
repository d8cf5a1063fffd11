#include "hesscut/vdc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hesscut {

namespace {

constexpr double kSamplesPerUnit = 4096.0;
constexpr double kInflate = 1.1;  // 10% safety inflation of sampled constants

int grid_count(double a, double b) {
  return std::max(2, static_cast<int>(std::ceil(kSamplesPerUnit * (b - a))) + 1);
}

}  // namespace

CertReport certify(VdcInstance& inst, const QuadConfig& cfg) {
  CertReport rep;
  if (!(inst.b > inst.a)) throw ValidationError("instance interval is empty");
  if (!inst.fprime || !inst.fsecond || !inst.g || !inst.omega ||
      !inst.omega_deriv)
    throw ValidationError("instance evaluators are not all set");
  const int n = grid_count(inst.a, inst.b);
  double inf_g = std::numeric_limits<double>::infinity();
  double sup_g = 0.0, c_raw = 0.0, sup_omega = 0.0;
  double where_inf = inst.a, prev_g = 0.0;
  bool sign_change = false;
  double where_sign = inst.a;
  for (int i = 0; i < n; ++i) {
    double s = inst.a + (inst.b - inst.a) * i / (n - 1);
    double gv = inst.g(s);
    double ag = std::abs(gv);
    if (ag < inf_g) {
      inf_g = ag;
      where_inf = s;
    }
    sup_g = std::max(sup_g, ag);
    if (i > 0 && !sign_change && prev_g * gv <= 0.0) {
      sign_change = true;
      where_sign = s;
    }
    prev_g = gv;
    double mismatch = std::abs(inst.fsecond(s) - gv);
    c_raw = std::max(c_raw, mismatch / std::max(std::abs(inst.fprime(s)),
                                                1e-30));
    sup_omega = std::max(sup_omega, std::abs(inst.omega(s)));
  }
  // a sign change forces a zero of g by continuity, so no positive delta can
  // satisfy the comparability hypothesis; a near-zero infimum relative to the
  // supremum is refused for the same reason at sampling accuracy
  if (sign_change || !(inf_g > 1e-12 * std::max(1.0, sup_g))) {
    std::ostringstream os;
    if (sign_change)
      os << "comparability fails: g changes sign near s=" << where_sign;
    else
      os << "comparability fails: |g| reaches " << inf_g << " near s="
         << where_inf;
    rep.detail = os.str();
    inst.certified = false;
    return rep;
  }
  rep.delta = inf_g / kInflate;
  rep.K = std::max(1.0, kInflate * sup_g / rep.delta);
  rep.C = kInflate * c_raw;
  rep.ok = true;
  inst.C = rep.C;
  inst.K = rep.K;
  inst.delta = rep.delta;
  inst.norm_inf = sup_omega;
  inst.norm_1 = integrate1d([&](double s) { return std::abs(inst.omega(s)); },
                            inst.a, inst.b, cfg);
  inst.norm_d1 = integrate1d(
      [&](double s) { return std::abs(inst.omega_deriv(s)); }, inst.a, inst.b,
      cfg);
  inst.certified = true;
  return rep;
}

double estprop_rhs(const VdcInstance& inst, double t) {
  if (!(t > 0.0)) throw ValidationError("time parameter must be positive");
  return std::sqrt(t / inst.delta) *
         (12.0 * inst.norm_inf + 4.0 * inst.norm_d1 +
          2.0 * inst.C * std::sqrt(inst.K) * inst.norm_1);
}

VdcReport estprop_verify(VdcInstance& inst, const std::vector<double>& t_grid,
                         const QuadConfig& cfg) {
  if (t_grid.empty()) throw ValidationError("empty t grid");
  VdcReport rep;
  CertReport cert = certify(inst, cfg);
  rep.hypotheses_ok = cert.ok;
  if (!cert.ok) {
    rep.hypothesis_failure = cert.detail;
    return rep;
  }
  for (double t : t_grid) {
    VdcPoint pt;
    pt.t = t;
    Osc1DSpec spec;
    spec.f = inst.f;
    spec.fprime = inst.fprime;
    spec.w = inst.omega;
    spec.a = inst.a;
    spec.b = inst.b;
    spec.t = t;
    pt.lhs = std::abs(osc1d(spec, cfg).value);
    pt.rhs = estprop_rhs(inst, t);
    pt.ratio = pt.lhs / pt.rhs;
    pt.wlog_regime = 2.0 * inst.C * std::sqrt(inst.K * t / inst.delta) <= 1.0;
    if (!pt.wlog_regime) ++rep.n_flagged;
    if (pt.ratio > 1.0) rep.violation = true;
    rep.max_ratio = std::max(rep.max_ratio, pt.ratio);
    rep.points.push_back(pt);
  }
  return rep;
}

EsetResult eset_structure(VdcInstance& inst, double eps,
                          const QuadConfig& cfg) {
  if (!(eps > 0.0)) throw ValidationError("sublevel threshold must be positive");
  EsetResult res;
  CertReport cert = certify(inst, cfg);
  res.claim_valid =
      cert.ok && (inst.C == 0.0 || eps < inst.delta / inst.C);
  const int n = grid_count(inst.a, inst.b);
  const double h = (inst.b - inst.a) / (n - 1);
  bool inside = false;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    double s = inst.a + (inst.b - inst.a) * i / (n - 1);
    bool in = std::abs(inst.fprime(s)) <= eps;
    if (in) {
      ++count;
      if (!inside) ++res.runs;
    }
    inside = in;
  }
  res.connected = (res.runs == 1);
  res.length = count * h;
  if (cert.ok && inst.delta > inst.C * eps)
    res.bound = 2.0 * eps / (inst.delta - inst.C * eps) + 2.0 * h;
  else
    res.bound = std::numeric_limits<double>::infinity();
  return res;
}

SupInterpReport sup_interp_check(const std::vector<SupInterpInstance>& family,
                                 int n, int k, double t_lo, double t_hi,
                                 int n_grid) {
  if (2 * k <= n)
    throw ValidationError("sup-interpolation requires 2k > n");
  if (!(t_hi > t_lo) || t_lo <= 0.0 || n_grid < 2)
    throw ValidationError("bad scan grid");
  SupInterpReport rep;
  for (const SupInterpInstance& m : family) {
    if (!(m.A > 0.0) || !(m.B > 0.0))
      throw ValidationError("declared envelope constants must be positive");
    double sup = 0.0;
    double lr = std::log(t_hi / t_lo);
    for (int i = 0; i < n_grid; ++i) {
      double t = t_lo * std::exp(lr * i / (n_grid - 1));
      sup = std::max(sup, std::abs(m.f(t)));
    }
    double expo = static_cast<double>(n) / (2.0 * k);
    double denom = std::pow(m.A, 1.0 - expo) * std::pow(m.B, expo);
    rep.constants.push_back(sup / denom);
    rep.max_constant = std::max(rep.max_constant, rep.constants.back());
  }
  return rep;
}

}  // namespace hesscut
