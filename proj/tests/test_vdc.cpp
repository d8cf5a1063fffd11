// Tests for the explicit 1-D estimates: the certified-hypothesis bound, its
// sublevel-set structure, and the sup-interpolation inequality.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hesscut/bump.hpp"
#include "hesscut/vdc.hpp"

using namespace hesscut;

namespace {

// Fresnel-type instance: f = s^2/2 on [-1,1], g == 1, bump amplitude
VdcInstance fresnel_instance() {
  VdcInstance inst;
  inst.f = [](double s) { return 0.5 * s * s; };
  inst.fprime = [](double s) { return s; };
  inst.fsecond = [](double) { return 1.0; };
  inst.g = [](double) { return 1.0; };
  static const Bump1 bump(1.0);
  inst.omega = [](double s) { return bump.value(s); };
  inst.omega_deriv = [](double s) { return bump.deriv(1, s); };
  inst.a = -1.0;
  inst.b = 1.0;
  return inst;
}

std::vector<double> quarter_grid() {
  std::vector<double> ts;
  for (int j = 0; j <= 8; ++j) ts.push_back(std::pow(4.0, -j));
  return ts;
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  double h = (b - a) / n, acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("bound formula: plug-in values, homogeneity, monotonicity") {
  VdcInstance inst;
  inst.norm_inf = 1.0;
  inst.norm_d1 = 0.0;
  inst.norm_1 = 0.0;
  inst.C = 0.0;
  inst.K = 1.0;
  inst.delta = 1.0;
  CHECK(estprop_rhs(inst, 1.0) == doctest::Approx(12.0).epsilon(1e-15));
  CHECK_THROWS_AS(estprop_rhs(inst, 0.0), ValidationError);

  VdcInstance full;
  full.norm_inf = 1.0;
  full.norm_d1 = 0.5;
  full.norm_1 = 0.3;
  full.C = 2.0;
  full.K = 3.0;
  full.delta = 0.7;
  double base = estprop_rhs(full, 0.2);
  CHECK(estprop_rhs(full, 0.8) == doctest::Approx(2.0 * base).epsilon(1e-14));
  auto bumped = [&](auto setter) {
    VdcInstance v = full;
    setter(v);
    return estprop_rhs(v, 0.2);
  };
  CHECK(bumped([](VdcInstance& v) { v.norm_inf *= 1.1; }) > base);
  CHECK(bumped([](VdcInstance& v) { v.norm_d1 *= 1.1; }) > base);
  CHECK(bumped([](VdcInstance& v) { v.norm_1 *= 1.1; }) > base);
  CHECK(bumped([](VdcInstance& v) { v.C *= 1.1; }) > base);
  CHECK(bumped([](VdcInstance& v) { v.K *= 1.1; }) > base);
  CHECK(bumped([](VdcInstance& v) { v.delta *= 1.1; }) < base);
}

TEST_CASE("certification computes exact constants for the Fresnel instance") {
  VdcInstance inst = fresnel_instance();
  CertReport cert = certify(inst);
  REQUIRE(cert.ok);
  CHECK(inst.C == 0.0);  // f'' == g exactly, no inflation of zero
  CHECK(inst.delta == doctest::Approx(1.0 / 1.1).epsilon(1e-14));
  CHECK(inst.K == doctest::Approx(1.21).epsilon(1e-14));
  CHECK(inst.norm_inf == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // omega decreases monotonically away from 0: ||omega'||_1 = 2 omega(0)
  CHECK(inst.norm_d1 == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-8));
  Bump1 bump(1.0);
  double l1 = simpson([&](double s) { return bump.value(s); }, -1.0, 1.0, 4000);
  CHECK(inst.norm_1 == doctest::Approx(l1).epsilon(1e-8));
}

TEST_CASE("the explicit bound holds across the quarter-power t grid") {
  VdcInstance inst = fresnel_instance();
  VdcReport rep = estprop_verify(inst, quarter_grid());
  REQUIRE(rep.hypotheses_ok);
  CHECK(!rep.violation);
  CHECK(rep.points.size() == 9);
  CHECK(rep.max_ratio <= 1.0);
  CHECK(rep.n_flagged == 0);  // C = 0: the reduction regime is all of t > 0
  // at small t the integral is Fresnel-like: sqrt(2 pi t) |omega(0)| up to
  // O(t), so the ratio approaches a positive constant well below 1
  const VdcPoint& last = rep.points.back();
  double predicted =
      std::sqrt(2.0 * M_PI * last.t) * std::exp(-1.0) / last.rhs;
  CHECK(last.ratio == doctest::Approx(predicted).epsilon(1e-2));
  CHECK(last.ratio > 0.05);
}

TEST_CASE("delta-scaling family stays within the bound") {
  for (double d0 : {1e-2, 1.0, 1e2}) {
    VdcInstance inst = fresnel_instance();
    inst.f = [d0](double s) { return 0.5 * d0 * s * s; };
    inst.fprime = [d0](double s) { return d0 * s; };
    inst.fsecond = [d0](double) { return d0; };
    inst.g = [d0](double) { return d0; };
    VdcReport rep = estprop_verify(inst, quarter_grid());
    REQUIRE(rep.hypotheses_ok);
    CHECK(!rep.violation);
    CHECK(rep.max_ratio <= 1.0);
  }
}

TEST_CASE("random certified cubic phases never violate the bound") {
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> alpha_dist(-0.1, 0.1);
  std::vector<double> ts = quarter_grid();
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    double alpha = alpha_dist(rng);
    VdcInstance inst = fresnel_instance();
    inst.f = [alpha](double s) { return 0.5 * s * s + alpha * s * s * s; };
    inst.fprime = [alpha](double s) { return s + 3.0 * alpha * s * s; };
    inst.fsecond = [alpha](double s) { return 1.0 + 6.0 * alpha * s; };
    VdcReport rep = estprop_verify(inst, ts);
    REQUIRE(rep.hypotheses_ok);
    CHECK(!rep.violation);
    // certified C should be close to the analytic sup of |6 alpha s| / |f'|
    double c_true = 6.0 * std::abs(alpha) / (1.0 - 3.0 * std::abs(alpha));
    CHECK(inst.C <= 1.1 * c_true * (1.0 + 1e-6));
    CHECK(inst.C >= 0.99 * 6.0 * std::abs(alpha));
    worst = std::max(worst, rep.max_ratio);
  }
  CHECK(worst <= 1.0);
}

TEST_CASE("large-t points outside the proof regime are flagged, not failed") {
  VdcInstance inst = fresnel_instance();
  double alpha = 0.09;
  inst.f = [alpha](double s) { return 0.5 * s * s + alpha * s * s * s; };
  inst.fprime = [alpha](double s) { return s + 3.0 * alpha * s * s; };
  inst.fsecond = [alpha](double s) { return 1.0 + 6.0 * alpha * s; };
  VdcReport rep = estprop_verify(inst, quarter_grid());
  REQUIRE(rep.hypotheses_ok);
  CHECK(rep.n_flagged >= 1);       // t = 1 has 2 C sqrt(K t / delta) > 1
  CHECK(!rep.points[0].wlog_regime);
  CHECK(rep.points.back().wlog_regime);
  CHECK(!rep.violation);
}

TEST_CASE("hypothesis failure is reported separately from violation") {
  VdcInstance inst = fresnel_instance();
  inst.f = [](double s) { return std::cos(s); };
  inst.fprime = [](double s) { return -std::sin(s); };
  inst.fsecond = [](double s) { return -std::cos(s); };
  inst.g = [](double s) { return -std::cos(s); };  // |g| vanishes at pi/2
  inst.a = 0.0;
  inst.b = 6.0;
  VdcReport rep = estprop_verify(inst, {0.25});
  CHECK(!rep.hypotheses_ok);
  CHECK(!rep.violation);
  CHECK(rep.points.empty());
  CHECK(rep.hypothesis_failure.find("comparability") != std::string::npos);
}

TEST_CASE("sublevel sets of the phase derivative") {
  VdcInstance fres = fresnel_instance();
  EsetResult e = eset_structure(fres, 0.1);
  CHECK(e.claim_valid);
  CHECK(e.connected);
  CHECK(e.runs == 1);
  CHECK(e.length == doctest::Approx(0.2).epsilon(5e-3));
  CHECK(e.length <= e.bound);
  // monotone in eps
  EsetResult e2 = eset_structure(fres, 0.05);
  CHECK(e2.length <= e.length);
  CHECK(e2.length == doctest::Approx(0.1).epsilon(5e-3));

  // certified cubic stays connected inside the regime
  double alpha = 0.08;
  VdcInstance cub = fresnel_instance();
  cub.f = [alpha](double s) { return 0.5 * s * s + alpha * s * s * s; };
  cub.fprime = [alpha](double s) { return s + 3.0 * alpha * s * s; };
  cub.fsecond = [alpha](double s) { return 1.0 + 6.0 * alpha * s; };
  EsetResult ec = eset_structure(cub, 0.3);
  CHECK(ec.claim_valid);
  CHECK(ec.connected);
  CHECK(ec.length <= ec.bound);

  // the trigonometric instance fails certification: three sampled runs and
  // no connectivity claim
  VdcInstance trig = fresnel_instance();
  trig.f = [](double s) { return std::cos(s); };
  trig.fprime = [](double s) { return -std::sin(s); };
  trig.fsecond = [](double s) { return -std::cos(s); };
  trig.g = [](double s) { return -std::cos(s); };
  trig.a = 0.0;
  trig.b = 6.0;
  EsetResult et = eset_structure(trig, 0.3);
  CHECK(!et.claim_valid);
  CHECK(!et.connected);
  CHECK(et.runs == 3);

  CHECK_THROWS_AS(eset_structure(fres, 0.0), ValidationError);
}

TEST_CASE("sup-interpolation inequality across constructed families") {
  // envelope family min(A/t, M) with declared B = 2 M^2 / A: the implied
  // constant is exactly M / sqrt(A B) = 1/sqrt(2)
  std::vector<SupInterpInstance> envelopes;
  for (auto [A, M] : std::vector<std::pair<double, double>>{
           {1.0, 1.0}, {10.0, 1.0}, {1.0, 10.0}, {5.0, 2.0}}) {
    SupInterpInstance m;
    m.f = [A = A, M = M](double t) { return std::min(A / t, M); };
    m.A = A;
    m.B = 2.0 * M * M / A;
    envelopes.push_back(m);
  }
  SupInterpReport rep = sup_interp_check(envelopes, 2, 2);
  CHECK(rep.max_constant <= 50.0);
  for (double c : rep.constants)
    CHECK(c == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));

  // scaling covariance: f(ct) rescales (A, B) -> (A/c, cB); constant fixed
  double c = 7.0, A = 3.0, M = 2.0;
  SupInterpInstance base{[A, M](double t) { return std::min(A / t, M); }, A,
                         2.0 * M * M / A};
  SupInterpInstance scaled{
      [A, M, c](double t) { return std::min(A / (c * t), M); }, A / c,
      c * 2.0 * M * M / A};
  SupInterpReport rep2 = sup_interp_check({base, scaled}, 2, 2);
  CHECK(rep2.constants[0] ==
        doctest::Approx(rep2.constants[1]).epsilon(1e-10));

  // oscillator family with honestly inflated derivative constant
  std::vector<SupInterpInstance> osc;
  for (double Av : {1.0, 10.0})
    for (double Bv : {1.0, 10.0}) {
      SupInterpInstance m;
      double freq = std::sqrt(Bv / Av);
      m.f = [Av, freq](double t) { return Av * std::sin(freq * t) / t; };
      m.A = Av;
      m.B = 5.0 * Bv;
      osc.push_back(m);
    }
  SupInterpReport rep3 = sup_interp_check(osc, 2, 2);
  CHECK(rep3.max_constant <= 50.0);
  for (double cst : rep3.constants) CHECK(cst > 0.05);

  CHECK_THROWS_AS(sup_interp_check(envelopes, 2, 1), ValidationError);
}

TEST_CASE("malformed instances are rejected") {
  VdcInstance inst;  // evaluators unset
  CHECK_THROWS_AS(certify(inst), ValidationError);
  VdcInstance fres = fresnel_instance();
  fres.b = fres.a;
  CHECK_THROWS_AS(certify(fres), ValidationError);
  VdcInstance ok = fresnel_instance();
  CHECK_THROWS_AS(estprop_verify(ok, {}), ValidationError);
}
