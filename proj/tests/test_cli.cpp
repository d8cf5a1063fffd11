// End-to-end tests of the command-line front end: subcommand payloads,
// config-file plumbing, exit codes, and output determinism.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hesscut/bump.hpp"
#include "hesscut/cli.hpp"
#include "hesscut/common.hpp"
#include "hesscut/config.hpp"
#include "hesscut/decayscan.hpp"
#include "hesscut/newton.hpp"
#include "hesscut/polyphase.hpp"

using namespace hesscut;
using Json = nlohmann::json;

namespace {

// run the CLI in-process with stdout/stderr captured
int run_captured(const std::vector<std::string>& args, std::string* out,
                 std::string* err = nullptr) {
  std::ostringstream oss, ess;
  std::streambuf* ob = std::cout.rdbuf(oss.rdbuf());
  std::streambuf* eb = std::cerr.rdbuf(ess.rdbuf());
  int rc = run_cli(args);
  std::cout.rdbuf(ob);
  std::cerr.rdbuf(eb);
  if (out) *out = oss.str();
  if (err) *err = ess.str();
  return rc;
}

// scratch file that removes itself
struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream f(path, std::ios::binary);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kCubic =
    R"({"dimension": 2, "terms": [{"exp": [3,0], "num": 1, "den": 1},)"
    R"( {"exp": [0,3], "num": 1, "den": 1}]})";
const char* kCusp =
    R"({"dimension": 2, "terms": [{"exp": [0,2], "num": 1, "den": 1},)"
    R"( {"exp": [2,1], "num": 2, "den": 1}, {"exp": [4,0], "num": 1, "den": 1}]})";
const char* kQuad =
    R"({"dimension": 2, "terms": [{"exp": [2,0], "num": 1, "den": 2},)"
    R"( {"exp": [0,2], "num": 1, "den": 2}]})";

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("analyze reports the polygon, diagonal class, and fold verdicts") {
  TempFile cusp("cli_cusp.json", kCusp);
  TempFile cubic("cli_cubic.json", kCubic);

  std::string out;
  REQUIRE(run_captured({"analyze", "--phase", cusp.path}, &out) == 0);
  Json j = Json::parse(out);

  CHECK(j["polygon"]["vertices"] == Json::parse("[[0,2],[4,0]]"));
  CHECK(j["s"] == 0);
  CHECK(j["polygon"]["diagonal_at_vertex"] == false);
  REQUIRE(j["edges"].size() == 1);
  CHECK(j["edges"][0]["beta_sq"]["num"] == "1");
  CHECK(j["edges"][0]["beta_sq"]["den"] == "2");
  CHECK(j["edges"][0]["touches_axis1"] == true);
  CHECK(j["edges"][0]["touches_axis2"] == true);
  // the phase echo is the bit-exact round-trip of the input file
  CHECK(j["phase"] == Json::parse(kCusp));

  bool violation_with_witness = false;
  for (const auto& f : j["fold"])
    if (f["verdict"] == "violation" && !f["witnesses"].empty())
      violation_with_witness = true;
  CHECK(violation_with_witness);

  REQUIRE(run_captured({"analyze", "--phase", cubic.path}, &out) == 0);
  j = Json::parse(out);
  CHECK(j["polygon"]["vertices"] == Json::parse("[[0,3],[3,0]]"));
  CHECK(j["s"] == 0);
  CHECK(j["edges"][0]["beta_sq"]["num"] == "1");
  CHECK(j["edges"][0]["beta_sq"]["den"] == "1");
  CHECK(j["edges"][0]["newton_distance"]["num"] == "3");
  CHECK(j["edges"][0]["newton_distance"]["den"] == "2");
  REQUIRE(j["fold"].size() == 3);  // off-axes and both near-axis strips
  for (const auto& f : j["fold"]) CHECK(f["verdict"] == "fold");
}

TEST_CASE("integrate reproduces the scan cell at the reported argmax") {
  TempFile cubic("cli_cubic2.json", kCubic);
  TempFile cfg("cli_scan.cfg",
               "scan.coarse = 9\nscan.refine = 5\nscan.passes = 1\n");

  std::string out;
  REQUIRE(run_captured({"--config", cfg.path, "scan", "--phase", cubic.path,
                        "--lmin", "5", "--lmax", "5", "--emin", "-2", "--emax",
                        "-2"},
                       &out) == 0);
  // payload is the CSV then the fit JSON; split at the first '{'
  size_t brace = out.find('{');
  REQUIRE(brace != std::string::npos);
  auto rows = parse_csv(out.substr(0, brace));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"lambda", "eps", "xi1", "xi2",
                                            "absval", "est_error"});
  CHECK(std::stod(rows[1][0]) == 32.0);
  CHECK(std::stod(rows[1][1]) == 0.25);
  double sup = std::stod(rows[1][4]);
  CHECK(sup > 0.0);
  Json fit = Json::parse(out.substr(brace));
  CHECK(fit["fit"].is_null());  // a single cell cannot support a fit
  CHECK(fit.contains("fit_error"));

  // evaluating the integral at the reported argmax reproduces the sup
  std::string xi = rows[1][2] + "," + rows[1][3];
  REQUIRE(run_captured({"integrate", "--phase", cubic.path, "--lambda", "32",
                        "--eps", "0.25", "--xi", xi},
                       &out) == 0);
  Json ji = Json::parse(out);
  CHECK(ji["abs"].get<double>() == doctest::Approx(sup).epsilon(1e-8));
  CHECK(ji["nodes_used"].get<long>() > 0);

  // and the zero-tilt value cannot exceed it
  REQUIRE(run_captured({"integrate", "--phase", cubic.path, "--lambda", "32",
                        "--eps", "0.25"},
                       &out) == 0);
  CHECK(Json::parse(out)["abs"].get<double>() <= sup * (1.0 + 1e-9));
}

TEST_CASE("config switches change the cutoff convention") {
  TempFile cubic("cli_cubic3.json", kCubic);
  TempFile one_sided("cli_chi.cfg", "chi.two_sided = false\n");

  std::string a, b;
  REQUIRE(run_captured({"integrate", "--phase", cubic.path, "--lambda", "16",
                        "--eps", "0.25"},
                       &a) == 0);
  REQUIRE(run_captured({"--config", one_sided.path, "integrate", "--phase",
                        cubic.path, "--lambda", "16", "--eps", "0.25"},
                       &b) == 0);
  double two = Json::parse(a)["abs"].get<double>();
  double one = Json::parse(b)["abs"].get<double>();
  CHECK(two > 0.0);
  CHECK(one > 0.0);
  // dropping the negative Hessian band changes the value
  CHECK(std::abs(two - one) > 1e-9 * two);
}

TEST_CASE("expand emits the quadratic-phase coefficients") {
  TempFile quad("cli_quad.json", kQuad);
  std::string out;
  REQUIRE(run_captured({"expand", "--phase", quad.path, "--point", "0,0",
                        "--order", "2", "--extra", "2"},
                       &out) == 0);
  Json j = Json::parse(out);
  CHECK(j["n"] == 2);
  CHECK(j["N"] == 2);
  CHECK(j["k"] == 2);
  REQUIRE(j["coeffs"].size() == 3);
  // c0 = 2 pi i psi(0) with psi(0) = e^{-2} for the standard bump
  double c0_im = j["coeffs"][0]["im"].get<double>();
  CHECK(c0_im == doctest::Approx(2.0 * M_PI * std::exp(-2.0)).epsilon(1e-10));
  CHECK(std::abs(j["coeffs"][0]["re"].get<double>()) <= 1e-12);
  CHECK(j["prefactor"]["im"].get<double>() ==
        doctest::Approx(2.0 * M_PI).epsilon(1e-12));
  CHECK(j["err_norm_a"].get<double>() > 0.0);
  CHECK(j["err_norm_b"].get<double>() > 0.0);

  // rational points accept n/d and decimal syntax; garbage is rejected
  TempFile shifted(
      "cli_shifted.json",
      R"({"dimension": 2, "terms": [{"exp": [2,0], "num": 1, "den": 2},)"
      R"( {"exp": [1,0], "num": -1, "den": 8}, {"exp": [0,2], "num": 1, "den": 2},)"
      R"( {"exp": [0,1], "num": 1, "den": 8}]})");
  REQUIRE(run_captured(
              {"expand", "--phase", shifted.path, "--point", "1/8,-0.125"},
              &out) == 0);
  Json js = Json::parse(out);
  // same quadratic up to translation: identical leading coefficient
  CHECK(js["coeffs"][0]["im"].get<double>() ==
        doctest::Approx(c0_im).epsilon(1e-10));
  std::string err;
  CHECK(run_captured({"expand", "--phase", quad.path, "--point", "x,0"}, &out,
                     &err) == 2);
  CHECK(err.find("rational") != std::string::npos);
}

TEST_CASE("foldcurve CSV carries the reduced phase and matching derivatives") {
  TempFile cubic("cli_cubic4.json", kCubic);
  std::string out;
  REQUIRE(run_captured({"foldcurve", "--phase", cubic.path, "--s-lo", "0.25",
                        "--s-hi", "1", "--samples", "9"},
                       &out) == 0);
  auto rows = parse_csv(out);
  REQUIRE(rows.size() == 1 + 2 * 9);  // header + two diagonal branches
  CHECK(rows[0] == std::vector<std::string>{"s", "gamma1", "gamma2", "f",
                                            "fprime", "f2_formula",
                                            "f2_numeric", "dphi_ds"});
  for (size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 8);
    double s = std::stod(rows[i][0]);
    double g1 = std::stod(rows[i][1]), g2 = std::stod(rows[i][2]);
    double f = std::stod(rows[i][3]);
    double f2f = std::stod(rows[i][5]), f2n = std::stod(rows[i][6]);
    double dens = std::stod(rows[i][7]);
    CHECK(s >= 0.25);
    CHECK(s <= 1.0);
    // the fold set of the cubic is the diagonal
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-9));
    // |f| = s^{3/2}/108 on either ray
    CHECK(std::abs(f) ==
          doctest::Approx(std::pow(s, 1.5) / 108.0).epsilon(1e-6));
    // determinant-identity value vs second difference of the samples
    CHECK(f2f == doctest::Approx(f2n).epsilon(0.15));
    CHECK(dens > 0.0);
  }
}

TEST_CASE("vdc-check holds the explicit bound on the built-in family") {
  std::string out, err;
  REQUIRE(run_captured({"vdc-check", "--alpha", "0.05"}, &out) == 0);
  auto rows = parse_csv(out);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == std::vector<std::string>{"t", "lhs", "rhs", "ratio"});
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][0]) ==
          doctest::Approx(std::pow(4.0, -(double)(i - 1))).epsilon(1e-14));
    CHECK(std::stod(rows[i][3]) <= 1.0);
  }
  // rhs scales exactly like sqrt(t): each quarter step halves it
  for (size_t i = 2; i < rows.size(); ++i)
    CHECK(std::stod(rows[i][2]) / std::stod(rows[i - 1][2]) ==
          doctest::Approx(0.5).epsilon(1e-12));

  // a slope that drives g = f'' through zero is refused as uncertifiable
  CHECK(run_captured({"vdc-check", "--alpha", "0.2"}, &out, &err) == 2);
  CHECK(err.find("certification failed") != std::string::npos);
}

TEST_CASE("boxes CSV round-trips the classification") {
  TempFile cubic("cli_cubic5.json", kCubic);
  std::string out;
  REQUIRE(run_captured(
              {"boxes", "--phase", cubic.path, "--eps", "0.25", "--j-max", "4"},
              &out) == 0);
  auto rows = parse_csv(out);
  REQUIRE(rows.size() == 1 + 25);
  CHECK(rows[0] == std::vector<std::string>{"j1", "j2", "class", "alpha1",
                                            "alpha2", "edge_index", "m", "band",
                                            "active"});

  PolyPhase phi = PolyPhase::from_terms(2, {{{3, 0}, 1}, {{0, 3}, 1}});
  NewtonPolygon g = build_polygon(phi);
  std::vector<BoxClass> boxes = classify_boxes(phi, g, 0.25, Chi(), 2.0, 4);
  REQUIRE(boxes.size() == 25);
  for (size_t i = 0; i < boxes.size(); ++i) {
    const std::vector<std::string>& r = rows[i + 1];
    const BoxClass& b = boxes[i];
    CHECK(std::stoi(r[0]) == b.j[0]);
    CHECK(std::stoi(r[1]) == b.j[1]);
    const char* kind = b.kind == BoxKind::Vertex ? "vertex"
                       : b.kind == BoxKind::Edge ? "edge"
                                                 : "negligible";
    CHECK(r[2] == kind);
    CHECK(std::stoi(r[5]) == b.edge_index);
    CHECK(std::stol(r[6]) == b.m);
    CHECK(std::stod(r[7]) == doctest::Approx(b.band).epsilon(1e-15));
    CHECK(std::stoi(r[8]) == (b.active ? 1 : 0));
  }
}

TEST_CASE("identical invocations are bit-identical") {
  TempFile cubic("cli_cubic6.json", kCubic);
  TempFile cfg("cli_det.cfg", "scan.coarse = 5\nscan.refine = 3\nscan.passes = 1\n");

  std::string a, b;
  std::vector<std::string> boxes_args{"boxes", "--phase", cubic.path, "--eps",
                                      "0.0625"};
  REQUIRE(run_captured(boxes_args, &a) == 0);
  REQUIRE(run_captured(boxes_args, &b) == 0);
  CHECK(a == b);

  std::vector<std::string> int_args{"integrate", "--phase", cubic.path,
                                    "--lambda", "64", "--eps", "0.25"};
  REQUIRE(run_captured(int_args, &a) == 0);
  REQUIRE(run_captured(int_args, &b) == 0);
  CHECK(a == b);

  std::vector<std::string> scan_args{"--config", cfg.path,   "scan",
                                     "--phase",  cubic.path, "--lmin",
                                     "4",        "--lmax",   "4",
                                     "--emin",   "-3",       "--emax",
                                     "-2"};
  REQUIRE(run_captured(scan_args, &a) == 0);
  REQUIRE(run_captured(scan_args, &b) == 0);
  CHECK(a == b);

  // the serial reference path computes the same payload bit for bit
  TempFile serial("cli_serial.cfg",
                  "quad.parallel = false\nscan.coarse = 5\nscan.refine = 3\n"
                  "scan.passes = 1\n");
  std::vector<std::string> serial_args = scan_args;
  serial_args[1] = serial.path;
  REQUIRE(run_captured(serial_args, &b) == 0);
  CHECK(a == b);
}

TEST_CASE("--out writes the payload file and keeps stdout for the fit") {
  TempFile cubic("cli_cubic7.json", kCubic);
  std::string out;
  REQUIRE(run_captured({"boxes", "--phase", cubic.path, "--eps", "0.25",
                        "--j-max", "3", "--out", "cli_boxes_payload.csv"},
                       &out) == 0);
  CHECK(out.empty());
  std::ifstream f("cli_boxes_payload.csv");
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  std::string direct;
  REQUIRE(run_captured(
              {"boxes", "--phase", cubic.path, "--eps", "0.25", "--j-max", "3"},
              &direct) == 0);
  CHECK(ss.str() == direct);
  std::remove("cli_boxes_payload.csv");

  std::string err;
  CHECK(run_captured({"boxes", "--phase", cubic.path, "--out",
                      "no_such_dir/x.csv"},
                     &out, &err) == 2);
  CHECK(err.find("cannot open output file") != std::string::npos);
}

TEST_CASE("exit codes: usage 2, validation 2, budget 3") {
  std::string out, err;
  CHECK(run_captured({}, &out, &err) == 2);
  CHECK(run_captured({"frobnicate"}, &out, &err) == 2);
  CHECK(run_captured({"integrate"}, &out, &err) == 2);  // missing --phase

  CHECK(run_captured({"--help"}, &out, &err) == 0);
  CHECK(out.find("config keys and defaults") != std::string::npos);
  CHECK(run_captured({"scan", "--help"}, &out, &err) == 0);
  CHECK(out.find("--lmin") != std::string::npos);
  CHECK(out.find("[4]") != std::string::npos);  // defaults are displayed

  TempFile broken("cli_broken.json",
                  "{\"dimension\": 2, \"terms\": [{\"exp\": [3,0], \"num\": 1\n");
  CHECK(run_captured({"analyze", "--phase", broken.path}, &out, &err) == 2);
  CHECK(err.find("line") != std::string::npos);
  CHECK(err.find("column") != std::string::npos);

  TempFile cubic("cli_cubic8.json", kCubic);
  CHECK(run_captured({"integrate", "--phase", cubic.path, "--lambda", "99999"},
                     &out, &err) == 3);
  CHECK(err.find("budget") != std::string::npos);

  TempFile badcfg("cli_bad.cfg", "quad.rel_tol = 1e-6\nnot.a.key = 1\n");
  CHECK(run_captured({"--config", badcfg.path, "integrate", "--phase",
                      cubic.path},
                     &out, &err) == 2);
  CHECK(err.find("line 2") != std::string::npos);
  CHECK(err.find("not.a.key") != std::string::npos);
}

TEST_CASE("manifest parsing: registry, typed getters, and docs") {
  Config c = Config::parse(
      "# comment line\n"
      "quad.rel_tol = 1e-6\n"
      "scan.coarse = 11  # trailing comment\n"
      "quad.parallel = false\n"
      "quad.rel_tol = 1e-7\n");  // last assignment wins
  CHECK(c.get_double("quad.rel_tol", 0.0) == 1e-7);
  CHECK(c.get_long("scan.coarse", 0) == 11);
  CHECK(c.get_bool("quad.parallel", true) == false);
  CHECK(c.get_long("scan.refine", 9) == 9);  // untouched key keeps the default
  CHECK(c.has("quad.rel_tol"));
  CHECK_FALSE(c.has("scan.refine"));

  CHECK_THROWS_AS(Config::parse("quad.rel_tol 1e-6\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse("quad.rel_tol =\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse("nonsense.key = 1\n"), ValidationError);
  CHECK_THROWS_AS(Config::load("definitely_missing.cfg"), ValidationError);

  Config typed = Config::parse("scan.coarse = abc\nquad.parallel = yes\n"
                               "quad.rel_tol = wide\n");
  CHECK_THROWS_AS(typed.get_long("scan.coarse", 0), ValidationError);
  CHECK_THROWS_AS(typed.get_bool("quad.parallel", true), ValidationError);
  CHECK_THROWS_AS(typed.get_double("quad.rel_tol", 0.0), ValidationError);

  // every registry key is documented and defaults parse by their own getters
  const std::vector<ConfigKey>& reg = config_registry();
  std::string docs = config_docs();
  size_t lines = 0;
  for (char ch : docs)
    if (ch == '\n') ++lines;
  CHECK(lines == reg.size());
  for (const ConfigKey& k : reg) {
    CHECK(!k.doc.empty());
    CHECK(docs.find(k.name + " = " + k.dflt) != std::string::npos);
    Config d = Config::parse(k.name + " = " + k.dflt + "\n");
    CHECK(d.has(k.name));
  }
}
