#include "hesscut/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "hesscut/bump.hpp"
#include "hesscut/common.hpp"
#include "hesscut/config.hpp"
#include "hesscut/decayscan.hpp"
#include "hesscut/foldcut.hpp"
#include "hesscut/geomschrod.hpp"
#include "hesscut/newton.hpp"
#include "hesscut/polyphase.hpp"
#include "hesscut/quadrature.hpp"
#include "hesscut/vdc.hpp"

namespace hesscut {

namespace {

using Json = nlohmann::ordered_json;

// fixed-width round-trip formatting; payloads carry no timestamps or machine
// identity, so identical invocations are bit-identical
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json rational_json(const Rational& r) {
  Json j;
  j["num"] = r.get_num().get_str();
  j["den"] = r.get_den().get_str();
  j["value"] = r.get_d();
  return j;
}

std::array<double, 2> parse_pair(const std::string& s, const char* what) {
  size_t comma = s.find(',');
  if (comma == std::string::npos)
    throw ValidationError(std::string(what) + ": expected two comma-separated numbers");
  auto one = [&](const std::string& part) {
    char* end = nullptr;
    double v = std::strtod(part.c_str(), &end);
    if (end == part.c_str() || *end != '\0')
      throw ValidationError(std::string(what) + ": '" + part + "' is not a number");
    return v;
  };
  return {one(s.substr(0, comma)), one(s.substr(comma + 1))};
}

// rational coordinate: integer, n/d, or finite decimal
Rational parse_rational(const std::string& s, const char* what) {
  std::string t = s;
  if (t.empty()) throw ValidationError(std::string(what) + ": empty coordinate");
  try {
    size_t dot = t.find('.');
    if (dot == std::string::npos) {
      Rational r(t, 10);  // handles "n" and "n/d"; explicit base (0 = autodetect
                          // would read a leading zero as octal)
      r.canonicalize();
      return r;
    }
    std::string whole = t.substr(0, dot), frac = t.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (neg) whole = whole.substr(1);
    if (whole.empty()) whole = "0";
    if (frac.find_first_not_of("0123456789") != std::string::npos ||
        whole.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument(t);
    Rational r(whole + frac, 10);
    for (size_t i = 0; i < frac.size(); ++i) r /= 10;
    if (neg) r = -r;
    r.canonicalize();
    return r;
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + ": '" + s +
                          "' is not a rational (use n, n/d, or a decimal)");
  }
}

std::array<Rational, 2> parse_rational_pair(const std::string& s, const char* what) {
  size_t comma = s.find(',');
  if (comma == std::string::npos)
    throw ValidationError(std::string(what) + ": expected two comma-separated coordinates");
  return {parse_rational(s.substr(0, comma), what),
          parse_rational(s.substr(comma + 1), what)};
}

// ----------------------------------------------------------- shared options

struct Common {
  Config cfg;                  // manifest (flags override its values)
  std::string out = "-";       // payload destination; "-" = stdout
  int threads = 0;             // 0 = library default
  std::string config_path;     // echoed by --help only; loaded in the prescan

  QuadConfig quad() const {
    QuadConfig q;
    q.rel_tol = cfg.get_double("quad.rel_tol", q.rel_tol);
    q.abs_tol = cfg.get_double("quad.abs_tol", q.abs_tol);
    q.gl_order = static_cast<int>(cfg.get_long("quad.gl_order", q.gl_order));
    q.gl_order_check =
        static_cast<int>(cfg.get_long("quad.gl_order_check", q.gl_order_check));
    q.max_passes = static_cast<int>(cfg.get_long("quad.max_passes", q.max_passes));
    q.max_nodes = cfg.get_long("quad.max_nodes", q.max_nodes);
    q.lambda_cap_2d = cfg.get_double("quad.lambda_cap_2d", q.lambda_cap_2d);
    q.lambda_cap_1d = cfg.get_double("quad.lambda_cap_1d", q.lambda_cap_1d);
    q.parallel = cfg.get_bool("quad.parallel", q.parallel);
    return q;
  }
  Chi chi() const { return Chi(cfg.get_bool("chi.two_sided", true)); }
  double psi_radius() const { return cfg.get_double("psi.radius", 0.5); }

  void emit(const std::string& text) const {
    if (out.empty() || out == "-") {
      std::cout << text;
      return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file: " + out);
    f << text;
  }
};

void apply_threads(int threads) {
  if (threads < 0) throw ValidationError("--threads must be >= 0");
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
}

// --------------------------------------------------------------- subcommands

int cmd_analyze(const Common& c, const std::string& phase_path) {
  PolyPhase phi = PolyPhase::load(phase_path);
  if (phi.dim() != 2)
    throw ValidationError("analyze: phase must have 2 variables");
  NewtonPolygon g = build_polygon(phi);
  std::vector<EdgeData> edges = edge_data(phi, g);

  WhitneyParams wp;
  wp.box_half = c.cfg.get_double("whitney.box_half", wp.box_half);
  wp.margin = c.cfg.get_double("whitney.margin", wp.margin);
  wp.density = c.cfg.get_double("whitney.density", wp.density);
  wp.tau1 = c.cfg.get_double("whitney.tau1", wp.tau1);
  wp.tau2 = c.cfg.get_double("whitney.tau2", wp.tau2);

  Json j;
  j["phase"] = Json::parse(phi.to_json());
  Json verts = Json::array();
  for (const Vec2i& v : g.vertices) verts.push_back({v.k1, v.k2});
  j["polygon"]["vertices"] = verts;
  j["polygon"]["newton_distance"] = rational_json(g.distance);
  j["polygon"]["diagonal_at_vertex"] = g.diagonal_at_vertex;
  j["s"] = diagonal_class(g);

  Json jedges = Json::array();
  for (const EdgeData& e : edges) {
    Json je;
    je["a"] = {e.a.k1, e.a.k2};
    je["b"] = {e.b.k1, e.b.k2};
    je["beta_sq"] = rational_json(e.beta_sq);
    je["newton_distance"] = rational_json(e.newton_distance);
    je["touches_axis1"] = e.touches_axis1;
    je["touches_axis2"] = e.touches_axis2;
    jedges.push_back(je);
  }
  j["edges"] = jedges;

  Json jfold = Json::array();
  for (size_t ei = 0; ei < edges.size(); ++ei) {
    for (Region r : applicable_regions(edges[ei])) {
      FoldReport rep = whitney_check(edges[ei].edge_poly, r, wp);
      Json jr;
      jr["edge"] = ei;
      jr["region"] = region_name(r);
      jr["verdict"] = rep.verdict == FoldVerdict::Fold        ? "fold"
                      : rep.verdict == FoldVerdict::Violation ? "violation"
                                                              : "inconclusive";
      jr["vacuous"] = rep.vacuous;
      jr["roots_checked"] = rep.roots_checked;
      jr["min_grad_scaled"] = rep.min_grad_scaled;
      jr["min_inj_scaled"] = rep.min_inj_scaled;
      Json jw = Json::array();
      for (const FoldWitness& w : rep.witnesses)
        jw.push_back({{"x1", w.x1}, {"x2", w.x2}, {"defect", w.defect}});
      jr["witnesses"] = jw;
      jfold.push_back(jr);
    }
  }
  j["fold"] = jfold;

  c.emit(j.dump(2) + "\n");
  return 0;
}

int cmd_integrate(const Common& c, const std::string& phase_path, double lambda,
                  double eps, const std::string& xi_str, double tol) {
  PolyPhase phi = PolyPhase::load(phase_path);
  if (phi.dim() != 2)
    throw ValidationError("integrate: phase must have 2 variables");
  std::array<double, 2> xi = parse_pair(xi_str, "--xi");
  Chi chi = c.chi();
  ProductBump psi = ProductBump::standard(2, c.psi_radius());
  PolyPhase u = phi.hessian_det();
  QuadConfig q = c.quad();
  if (tol > 0.0) q.rel_tol = tol;

  Osc2DSpec spec = make_osc2d(phi, lambda, xi[0], xi[1], &chi, &u, eps, &psi);
  IntegralValue v = osc2d(spec, q);

  Json j;
  j["value"] = {{"re", v.value.real()}, {"im", v.value.imag()}};
  j["abs"] = std::abs(v.value);
  j["est_error"] = v.est_error;
  j["nodes_used"] = v.nodes;
  j["converged"] = v.converged;
  c.emit(j.dump(2) + "\n");
  return 0;
}

int cmd_expand(const Common& c, const std::string& phase_path,
               const std::string& point_str, int N, int k, double psi_radius,
               double box_half) {
  PolyPhase phi = PolyPhase::load(phase_path);
  std::array<Rational, 2> pr{Rational(0), Rational(0)};
  std::vector<Rational> p;
  if (phi.dim() == 2) {
    pr = parse_rational_pair(point_str, "--point");
    p = {pr[0], pr[1]};
  } else {
    p.assign(phi.dim(), Rational(0));
    if (point_str != "0,0")
      throw ValidationError("expand: --point is only supported for 2 variables");
  }
  if (!(psi_radius > 0.0))
    throw ValidationError("expand: --psi-radius must be positive");

  SchrodOperator op = build_box(phi, p, box_half);
  std::vector<double> radii(phi.dim(), psi_radius), centers;
  for (const Rational& r : p) centers.push_back(r.get_d());
  ProductBump psi(radii, centers);
  ExpansionResult ex = expansion(op, psi, N, k);

  Json j;
  j["n"] = ex.n;
  j["N"] = ex.N;
  j["k"] = ex.k;
  Json jp = Json::array();
  for (const Rational& r : p) jp.push_back(rational_json(r));
  j["point"] = jp;
  j["prefactor"] = {{"re", ex.prefactor.real()}, {"im", ex.prefactor.imag()}};
  Json jc = Json::array();
  for (const Complex& z : ex.coeffs)
    jc.push_back({{"re", z.real()}, {"im", z.imag()}});
  j["coeffs"] = jc;
  j["err_norm_a"] = ex.err_norm_a;
  j["err_norm_b"] = ex.err_norm_b;
  c.emit(j.dump(2) + "\n");
  return 0;
}

int cmd_foldcurve(const Common& c, const std::string& phase_path,
                  const std::string& xi_str, double s_lo, double s_hi,
                  int samples, double window) {
  PolyPhase phi = PolyPhase::load(phase_path);
  if (phi.dim() != 2)
    throw ValidationError("foldcurve: phase must have 2 variables");
  std::array<double, 2> xi2 = parse_pair(xi_str, "--xi");
  std::vector<double> xi{xi2[0], xi2[1]};
  PolyPhase u = phi.hessian_det();
  if (!(window > 0.0)) throw ValidationError("foldcurve: window must be positive");
  Window2 win;
  win.x1 = {-window, window};
  win.x2 = {-window, window};

  std::vector<FoldCurve> curves =
      trace_all_branches(phi, xi, u, win, s_lo, s_hi, samples);
  if (curves.empty())
    throw ValidationError("foldcurve: no fold branch meets the window");

  std::ostringstream os;
  os << "s,gamma1,gamma2,f,fprime,f2_formula,f2_numeric,dphi_ds\n";
  for (const FoldCurve& curve : curves) {
    const std::vector<FoldSample>& sm = curve.samples;
    for (size_t i = 0; i < sm.size(); ++i) {
      // second difference of the sampled reduced phase derivative
      double f2_num;
      if (sm.size() < 2) {
        f2_num = 0.0;
      } else if (i == 0) {
        f2_num = (sm[1].fprime - sm[0].fprime) / (sm[1].s - sm[0].s);
      } else if (i + 1 == sm.size()) {
        f2_num = (sm[i].fprime - sm[i - 1].fprime) / (sm[i].s - sm[i - 1].s);
      } else {
        f2_num = (sm[i + 1].fprime - sm[i - 1].fprime) / (sm[i + 1].s - sm[i - 1].s);
      }
      double f2_form = reduced_f2(phi, xi, u, curve, sm[i].s);
      os << fmt(sm[i].s) << ',' << fmt(sm[i].x1) << ',' << fmt(sm[i].x2) << ','
         << fmt(sm[i].f) << ',' << fmt(sm[i].fprime) << ',' << fmt(f2_form)
         << ',' << fmt(f2_num) << ',' << fmt(sm[i].density) << '\n';
    }
  }
  c.emit(os.str());
  return 0;
}

int cmd_vdc_check(const Common& c, double alpha) {
  // built-in near-Fresnel family: f = s^2/2 + alpha s^3 on [-1, 1]
  static const Bump1 bump(1.0);
  VdcInstance inst;
  inst.a = -1.0;
  inst.b = 1.0;
  inst.f = [alpha](double s) { return 0.5 * s * s + alpha * s * s * s; };
  inst.fprime = [alpha](double s) { return s + 3.0 * alpha * s * s; };
  inst.fsecond = [alpha](double s) { return 1.0 + 6.0 * alpha * s; };
  inst.g = inst.fsecond;
  inst.omega = [](double s) { return bump.value(s); };
  inst.omega_deriv = [](double s) { return bump.deriv(1, s); };

  std::vector<double> ts;
  for (int jj = 0; jj <= 8; ++jj) ts.push_back(std::pow(4.0, -jj));
  VdcReport rep = estprop_verify(inst, ts, c.quad());
  if (!rep.hypotheses_ok)
    throw ValidationError("vdc-check: certification failed: " +
                          rep.hypothesis_failure);

  std::ostringstream os;
  os << "t,lhs,rhs,ratio\n";
  for (const VdcPoint& p : rep.points)
    os << fmt(p.t) << ',' << fmt(p.lhs) << ',' << fmt(p.rhs) << ','
       << fmt(p.ratio) << '\n';
  c.emit(os.str());
  return 0;
}

int cmd_scan(const Common& c, const std::string& phase_path, int lmin, int lmax,
             int emin, int emax, int s_hint) {
  PolyPhase phi = PolyPhase::load(phase_path);
  if (phi.dim() != 2) throw ValidationError("scan: phase must have 2 variables");
  if (lmin > lmax || emin > emax)
    throw ValidationError("scan: empty dyadic range");

  Chi chi = c.chi();
  ProductBump psi = ProductBump::standard(2, c.psi_radius());
  ScanConfig sc;
  sc.coarse = static_cast<int>(c.cfg.get_long("scan.coarse", sc.coarse));
  sc.refine = static_cast<int>(c.cfg.get_long("scan.refine", sc.refine));
  sc.passes = static_cast<int>(c.cfg.get_long("scan.passes", sc.passes));
  sc.quad = c.quad();
  XiBox box =
      default_xi_box(phi, psi, c.cfg.get_double("scan.margin", 0.5));

  std::vector<double> lambdas, epss;
  for (int e = lmin; e <= lmax; ++e) lambdas.push_back(std::ldexp(1.0, e));
  for (int e = emin; e <= emax; ++e) epss.push_back(std::ldexp(1.0, e));
  std::vector<ScanRecord> recs = scan_grid(phi, lambdas, epss, chi, psi, box, sc);

  std::ostringstream os;
  os << "lambda,eps,xi1,xi2,absval,est_error\n";
  for (const ScanRecord& r : recs)
    os << fmt(r.lambda) << ',' << fmt(r.eps) << ',' << fmt(r.xi_star[0]) << ','
       << fmt(r.xi_star[1]) << ',' << fmt(r.sup_val) << ',' << fmt(r.est_error)
       << '\n';
  c.emit(os.str());

  Json j;
  try {
    FitResult f = fit_decay(recs, s_hint);
    j["fit"] = {{"rho_lambda", f.rho_lambda},
                {"se_lambda", f.se_lambda},
                {"rho_eps", f.rho_eps},
                {"se_eps", f.se_eps},
                {"rms_power", f.rms_power},
                {"log_slope", f.log_slope},
                {"log_slope_se", f.log_slope_se},
                {"log_slope_tstat", f.log_slope_tstat},
                {"rms_comp_const", f.rms_comp_const},
                {"rms_comp_log", f.rms_comp_log},
                {"comp_ratio", f.comp_ratio},
                {"s_hint", f.s_hint}};
  } catch (const ValidationError& e) {
    // a small grid is still a valid scan; report why no fit is attached
    j["fit"] = nullptr;
    j["fit_error"] = e.what();
  }
  std::cout << j.dump(2) + "\n";
  return 0;
}

int cmd_boxes(const Common& c, const std::string& phase_path, double eps,
              double c_edge, int j_max) {
  PolyPhase phi = PolyPhase::load(phase_path);
  if (phi.dim() != 2) throw ValidationError("boxes: phase must have 2 variables");
  NewtonPolygon g = build_polygon(phi);
  std::vector<BoxClass> boxes =
      classify_boxes(phi, g, eps, c.chi(), c_edge, j_max);

  std::ostringstream os;
  os << "j1,j2,class,alpha1,alpha2,edge_index,m,band,active\n";
  for (const BoxClass& b : boxes) {
    const char* kind = b.kind == BoxKind::Vertex ? "vertex"
                       : b.kind == BoxKind::Edge ? "edge"
                                                 : "negligible";
    os << b.j[0] << ',' << b.j[1] << ',' << kind << ',' << b.alpha.k1 << ','
       << b.alpha.k2 << ',' << b.edge_index << ',' << b.m << ',' << fmt(b.band)
       << ',' << (b.active ? 1 : 0) << '\n';
  }
  c.emit(os.str());
  return 0;
}

// ------------------------------------------------------------------ wiring

int run_impl(const std::vector<std::string>& args) {
  Common c;

  // load the manifest first so its values become the displayed defaults;
  // any flag given on the command line then overrides the manifest
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      c.config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      c.config_path = args[i].substr(9);
    }
  }
  if (!c.config_path.empty()) c.cfg = Config::load(c.config_path);
  c.out = c.cfg.get_string("out.path", "-");

  CLI::App app{
      "oscillatory integrals with Hessian-determinant cutoffs: polygon "
      "analysis, quadrature, expansions, fold curves, and decay scans"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.add_option("--config", c.config_path,
                 "experiment manifest (flat key = value file; flags override)");
  app.add_option("--out", c.out, "payload destination (- = stdout)");
  app.add_option("--threads", c.threads, "OpenMP thread count (0 = default)");
  app.footer("config keys and defaults:\n" + config_docs());

  std::string phase_path;
  double lambda = 64.0, eps = 0.25, tol = 0.0;
  std::string xi_str = "0,0", point_str = "0,0";
  int N = 2, K = 2;
  double psi_radius = c.psi_radius();
  double box_half = 1.0;
  double s_lo = 0.25, s_hi = 1.0;
  int samples = static_cast<int>(c.cfg.get_long("fold.samples", 33));
  double window = c.cfg.get_double("fold.window", 1.0);
  double alpha = 0.05;
  int lmin = static_cast<int>(c.cfg.get_long("scan.lmin", 4));
  int lmax = static_cast<int>(c.cfg.get_long("scan.lmax", 11));
  int emin = static_cast<int>(c.cfg.get_long("scan.emin", -8));
  int emax = static_cast<int>(c.cfg.get_long("scan.emax", -2));
  int s_hint = 0;
  double c_edge = c.cfg.get_double("boxes.c_edge", 2.0);
  int j_max = static_cast<int>(c.cfg.get_long("boxes.j_max", 16));

  CLI::App* a_an = app.add_subcommand(
      "analyze", "Newton polygon, edge data, and Whitney-fold verdicts (JSON)");
  a_an->add_option("--phase", phase_path, "phase polynomial file (JSON)")
      ->required();

  CLI::App* a_int = app.add_subcommand(
      "integrate", "one cutoff oscillatory integral (JSON value)");
  a_int->add_option("--phase", phase_path, "phase polynomial file (JSON)")
      ->required();
  a_int->add_option("--lambda", lambda, "frequency");
  a_int->add_option("--eps", eps, "cutoff scale");
  a_int->add_option("--xi", xi_str, "linear tilt a,b");
  a_int->add_option("--tol", tol, "relative tolerance override (0 = config)");

  CLI::App* a_ex = app.add_subcommand(
      "expand", "stationary-phase expansion coefficients at a point (JSON)");
  a_ex->add_option("--phase", phase_path, "phase polynomial file (JSON)")
      ->required();
  a_ex->add_option("--point", point_str, "expansion point p1,p2 (rational)");
  a_ex->add_option("--order", N, "highest coefficient order N");
  a_ex->add_option("--extra", K, "error-splitting order k (needs 2k > n)");
  a_ex->add_option("--psi-radius", psi_radius, "amplitude half-width around p");
  a_ex->add_option("--box-half", box_half, "nondegeneracy box half-width");

  CLI::App* a_fc = app.add_subcommand(
      "foldcurve", "trace the fold curve and its reduced phase (CSV)");
  a_fc->add_option("--phase", phase_path, "phase polynomial file (JSON)")
      ->required();
  a_fc->add_option("--xi", xi_str, "linear tilt a,b");
  a_fc->add_option("--s-lo", s_lo, "lowest cutoff value");
  a_fc->add_option("--s-hi", s_hi, "highest cutoff value");
  a_fc->add_option("--samples", samples, "samples per branch");
  a_fc->add_option("--window", window, "tracing window half-width");

  CLI::App* a_vdc = app.add_subcommand(
      "vdc-check", "explicit 1-D bound on the built-in cubic family (CSV)");
  a_vdc->add_option("--alpha", alpha, "cubic coefficient of f = s^2/2 + alpha s^3");

  CLI::App* a_sc = app.add_subcommand(
      "scan", "sup-over-tilt decay scan on a dyadic grid (CSV + fit JSON)");
  a_sc->add_option("--phase", phase_path, "phase polynomial file (JSON)")
      ->required();
  a_sc->add_option("--lmin", lmin, "smallest dyadic frequency exponent");
  a_sc->add_option("--lmax", lmax, "largest dyadic frequency exponent");
  a_sc->add_option("--emin", emin, "smallest dyadic cutoff exponent");
  a_sc->add_option("--emax", emax, "largest dyadic cutoff exponent");
  a_sc->add_option("--s-hint", s_hint, "expected log power (0 or 1)");

  CLI::App* a_bx = app.add_subcommand(
      "boxes", "bi-dyadic box classification and active bands (CSV)");
  a_bx->add_option("--phase", phase_path, "phase polynomial file (JSON)")
      ->required();
  a_bx->add_option("--eps", eps, "cutoff scale");
  a_bx->add_option("--c-edge", c_edge, "edge band half-width");
  a_bx->add_option("--j-max", j_max, "largest dyadic index per axis");

  for (CLI::App* sub : {a_an, a_int, a_ex, a_fc, a_vdc, a_sc, a_bx}) {
    sub->fallthrough();
    sub->option_defaults()->always_capture_default();
  }

  std::vector<std::string> argv_store;
  argv_store.push_back("hesscut");
  for (const std::string& a : args) argv_store.push_back(a);
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  apply_threads(c.threads);

  if (a_an->parsed()) return cmd_analyze(c, phase_path);
  if (a_int->parsed())
    return cmd_integrate(c, phase_path, lambda, eps, xi_str, tol);
  if (a_ex->parsed())
    return cmd_expand(c, phase_path, point_str, N, K, psi_radius, box_half);
  if (a_fc->parsed())
    return cmd_foldcurve(c, phase_path, xi_str, s_lo, s_hi, samples, window);
  if (a_vdc->parsed()) return cmd_vdc_check(c, alpha);
  if (a_sc->parsed())
    return cmd_scan(c, phase_path, lmin, lmax, emin, emax, s_hint);
  if (a_bx->parsed()) return cmd_boxes(c, phase_path, eps, c_edge, j_max);
  return 2;  // unreachable with require_subcommand(1)
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return run_impl(args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace hesscut
