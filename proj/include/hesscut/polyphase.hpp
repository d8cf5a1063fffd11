#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hesscut/common.hpp"
#include "hesscut/interval.hpp"

namespace hesscut {

using Rational = mpq_class;
using Exponent = std::vector<int>;

// Graded-lexicographic term order: lower total degree first, then
// lexicographic on the exponent vector. This is the canonical term order for
// serialization, so emitted phase files are bit-identical across runs.
struct GradedLex {
  bool operator()(const Exponent& a, const Exponent& b) const {
    long da = 0, db = 0;
    for (int v : a) da += v;
    for (int v : b) db += v;
    if (da != db) return da < db;
    return a < b;
  }
};

using TermMap = std::map<Exponent, Rational, GradedLex>;

// Multivariate polynomial with exact rational coefficients. This is the
// "phase" object everything else consumes: evaluation, calculus, Hessian
// determinants, dyadic rescalings and file I/O all stay exact.
class PolyPhase {
 public:
  PolyPhase() = default;
  explicit PolyPhase(int dim) : dim_(dim) {
    if (dim < 1) throw ValidationError("polynomial dimension must be >= 1");
  }

  static PolyPhase from_terms(int dim,
                              const std::vector<std::pair<Exponent, Rational>>& terms);
  static PolyPhase monomial(int dim, const Exponent& e, const Rational& c);
  static PolyPhase constant(int dim, const Rational& c);

  // Phase-file format: {"dimension": n, "terms": [{"exp": [...], "num": .., "den": ..}]}
  static PolyPhase parse(const std::string& json_text);
  static PolyPhase load(const std::string& path);
  std::string to_json() const;
  std::string to_string() const;  // human-readable, graded-lex order

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  long degree() const;  // total degree; -1 for the zero polynomial
  const TermMap& terms() const { return terms_; }
  std::vector<Exponent> support() const;
  Rational coeff(const Exponent& e) const;

  void add_term(const Exponent& e, const Rational& c);

  PolyPhase operator+(const PolyPhase& o) const;
  PolyPhase operator-(const PolyPhase& o) const;
  PolyPhase operator*(const PolyPhase& o) const;
  PolyPhase operator-() const;
  PolyPhase operator*(const Rational& s) const;
  bool operator==(const PolyPhase& o) const {
    return dim_ == o.dim_ && terms_ == o.terms_;
  }

  PolyPhase partial(int i) const;
  std::vector<PolyPhase> gradient() const;
  std::vector<std::vector<PolyPhase>> hessian() const;
  PolyPhase hessian_det() const;  // exact polynomial determinant of the Hessian

  Rational eval(const std::vector<Rational>& x) const;
  double eval_d(const std::vector<double>& x) const;

  // P(x + p): exact translation (used to move critical points to the origin)
  PolyPhase shifted(const std::vector<Rational>& p) const;
  // P(c1 x1, ..., cn xn): exact axis scaling (dyadic box rescalings)
  PolyPhase scaled(const std::vector<Rational>& c) const;

  // Univariate coefficients of s |-> P(p + s (q - p)), exact. Degree-m
  // coefficient list; used for the Beta-moment weighted Hessians.
  std::vector<Rational> restrict_segment(const std::vector<Rational>& p,
                                         const std::vector<Rational>& q) const;

 private:
  int dim_ = 0;
  TermMap terms_;
  void check_same_dim(const PolyPhase& o) const;
};

// Flattened double-precision view of a 2-variable polynomial for hot loops.
struct FlatPoly2 {
  struct Term {
    int e1, e2;
    double c;
  };
  std::vector<Term> terms;
  int max1 = 0, max2 = 0;

  double operator()(double x, double y) const;
  // true when every term depends on only one of the variables, so
  // exp(i*lam*P) factors into per-axis parts
  bool separable() const;
  // range bound over a box via interval arithmetic (never underestimates)
  Interval bound(const Interval& X, const Interval& Y) const;
};

FlatPoly2 flatten2(const PolyPhase& p);

}  // namespace hesscut
