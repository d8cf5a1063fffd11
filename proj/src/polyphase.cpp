#include "hesscut/polyphase.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hesscut {

using json = nlohmann::json;

void PolyPhase::check_same_dim(const PolyPhase& o) const {
  if (dim_ != o.dim_)
    throw ValidationError("polynomial dimension mismatch: " + std::to_string(dim_) +
                          " vs " + std::to_string(o.dim_));
}

PolyPhase PolyPhase::from_terms(int dim,
                                const std::vector<std::pair<Exponent, Rational>>& terms) {
  PolyPhase p(dim);
  for (const auto& [e, c] : terms) p.add_term(e, c);
  return p;
}

PolyPhase PolyPhase::monomial(int dim, const Exponent& e, const Rational& c) {
  PolyPhase p(dim);
  p.add_term(e, c);
  return p;
}

PolyPhase PolyPhase::constant(int dim, const Rational& c) {
  return monomial(dim, Exponent(dim, 0), c);
}

void PolyPhase::add_term(const Exponent& e, const Rational& c) {
  if (static_cast<int>(e.size()) != dim_)
    throw ValidationError("exponent arity " + std::to_string(e.size()) +
                          " does not match dimension " + std::to_string(dim_));
  for (int v : e)
    if (v < 0) throw ValidationError("negative exponent in polynomial term");
  // GMP rationals built from strings or raw num/den pairs may arrive
  // non-canonical; equality of stored coefficients requires canonical form.
  Rational cc = c;
  cc.canonicalize();
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    if (cc != 0) terms_.emplace(e, cc);
  } else {
    it->second += cc;
    if (it->second == 0) terms_.erase(it);
  }
}

long PolyPhase::degree() const {
  if (terms_.empty()) return -1;
  // graded order: the last key has maximal total degree
  const Exponent& e = terms_.rbegin()->first;
  long d = 0;
  for (int v : e) d += v;
  return d;
}

std::vector<Exponent> PolyPhase::support() const {
  std::vector<Exponent> s;
  s.reserve(terms_.size());
  for (const auto& [e, c] : terms_) s.push_back(e);
  return s;
}

Rational PolyPhase::coeff(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

PolyPhase PolyPhase::operator+(const PolyPhase& o) const {
  check_same_dim(o);
  PolyPhase r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

PolyPhase PolyPhase::operator-(const PolyPhase& o) const {
  check_same_dim(o);
  PolyPhase r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

PolyPhase PolyPhase::operator-() const {
  PolyPhase r(dim_);
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
  return r;
}

PolyPhase PolyPhase::operator*(const Rational& s) const {
  PolyPhase r(dim_);
  Rational ss = s;
  ss.canonicalize();
  if (ss == 0) return r;
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, c * ss);
  return r;
}

PolyPhase PolyPhase::operator*(const PolyPhase& o) const {
  check_same_dim(o);
  PolyPhase r(dim_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      Exponent e(dim_);
      for (int i = 0; i < dim_; ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

PolyPhase PolyPhase::partial(int i) const {
  if (i < 0 || i >= dim_) throw ValidationError("partial(): variable index out of range");
  PolyPhase r(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponent d = e;
    d[i] -= 1;
    r.add_term(d, c * e[i]);
  }
  return r;
}

std::vector<PolyPhase> PolyPhase::gradient() const {
  std::vector<PolyPhase> g;
  g.reserve(dim_);
  for (int i = 0; i < dim_; ++i) g.push_back(partial(i));
  return g;
}

std::vector<std::vector<PolyPhase>> PolyPhase::hessian() const {
  std::vector<std::vector<PolyPhase>> h(dim_, std::vector<PolyPhase>(dim_));
  for (int i = 0; i < dim_; ++i) {
    PolyPhase pi = partial(i);
    for (int j = 0; j < dim_; ++j) h[i][j] = pi.partial(j);
  }
  return h;
}

namespace {
// Laplace expansion on a matrix of polynomials; n is small (the phase arity)
PolyPhase poly_det(const std::vector<std::vector<PolyPhase>>& m, int dim) {
  size_t n = m.size();
  if (n == 1) return m[0][0];
  PolyPhase acc(dim);
  for (size_t k = 0; k < n; ++k) {
    if (m[0][k].is_zero()) continue;
    std::vector<std::vector<PolyPhase>> minor(n - 1);
    for (size_t r = 1; r < n; ++r)
      for (size_t c = 0; c < n; ++c)
        if (c != k) minor[r - 1].push_back(m[r][c]);
    PolyPhase term = m[0][k] * poly_det(minor, dim);
    if (k % 2 == 0)
      acc = acc + term;
    else
      acc = acc - term;
  }
  return acc;
}
}  // namespace

PolyPhase PolyPhase::hessian_det() const { return poly_det(hessian(), dim_); }

namespace {
Rational rat_pow(const Rational& x, int k) {
  Rational r(1);
  Rational base = x;
  int e = k;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}
}  // namespace

Rational PolyPhase::eval(const std::vector<Rational>& x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw ValidationError("eval(): point arity does not match dimension");
  Rational acc(0);
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (int i = 0; i < dim_; ++i)
      if (e[i] > 0) t *= rat_pow(x[i], e[i]);
    acc += t;
  }
  return acc;
}

double PolyPhase::eval_d(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw ValidationError("eval_d(): point arity does not match dimension");
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c.get_d();
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    acc += t;
  }
  return acc;
}

PolyPhase PolyPhase::shifted(const std::vector<Rational>& p) const {
  if (static_cast<int>(p.size()) != dim_)
    throw ValidationError("shifted(): point arity does not match dimension");
  // expand each term prod_i (x_i + p_i)^{e_i} by repeated multiplication
  PolyPhase r(dim_);
  for (const auto& [e, c] : terms_) {
    PolyPhase t = PolyPhase::constant(dim_, c);
    for (int i = 0; i < dim_; ++i) {
      if (e[i] == 0) continue;
      Exponent unit(dim_, 0);
      unit[i] = 1;
      PolyPhase lin = PolyPhase::monomial(dim_, unit, 1);
      lin.add_term(Exponent(dim_, 0), p[i]);
      for (int k = 0; k < e[i]; ++k) t = t * lin;
    }
    r = r + t;
  }
  return r;
}

PolyPhase PolyPhase::scaled(const std::vector<Rational>& c) const {
  if (static_cast<int>(c.size()) != dim_)
    throw ValidationError("scaled(): factor arity does not match dimension");
  PolyPhase r(dim_);
  for (const auto& [e, coef] : terms_) {
    Rational t = coef;
    for (int i = 0; i < dim_; ++i)
      if (e[i] > 0) t *= rat_pow(c[i], e[i]);
    r.add_term(e, t);
  }
  return r;
}

std::vector<Rational> PolyPhase::restrict_segment(const std::vector<Rational>& p,
                                                  const std::vector<Rational>& q) const {
  if (static_cast<int>(p.size()) != dim_ || static_cast<int>(q.size()) != dim_)
    throw ValidationError("restrict_segment(): point arity does not match dimension");
  long dmax = std::max<long>(degree(), 0);
  std::vector<Rational> out(dmax + 1, Rational(0));
  // per term: c * prod_i (p_i + s d_i)^{e_i}, accumulated as univariate coeffs
  for (const auto& [e, c] : terms_) {
    std::vector<Rational> t{c};
    for (int i = 0; i < dim_; ++i) {
      Rational di = q[i] - p[i];
      for (int k = 0; k < e[i]; ++k) {
        std::vector<Rational> nt(t.size() + 1, Rational(0));
        for (size_t m = 0; m < t.size(); ++m) {
          nt[m] += t[m] * p[i];
          nt[m + 1] += t[m] * di;
        }
        t = std::move(nt);
      }
    }
    for (size_t m = 0; m < t.size(); ++m) out[m] += t[m];
  }
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

// ---------------------------------------------------------------- JSON I/O

namespace {
Rational rational_from_json(const json& num, const json& den, size_t idx) {
  auto big = [idx](const json& v, const char* which) -> mpz_class {
    if (v.is_number_integer()) return mpz_class(static_cast<long>(v.get<int64_t>()));
    if (v.is_string()) {
      try {
        return mpz_class(v.get<std::string>());
      } catch (const std::invalid_argument&) {
        throw ValidationError("term " + std::to_string(idx) + ": " + which +
                              " is not a valid integer string");
      }
    }
    throw ValidationError("term " + std::to_string(idx) + ": " + which +
                          " must be an integer or integer string");
  };
  mpz_class n = big(num, "num");
  mpz_class d = big(den, "den");
  if (d == 0) throw ValidationError("term " + std::to_string(idx) + ": den must be nonzero");
  Rational r(n, d);
  r.canonicalize();
  return r;
}
}  // namespace

PolyPhase PolyPhase::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("phase file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dimension") || !j.contains("terms"))
    throw ValidationError("phase file must be an object with 'dimension' and 'terms'");
  if (!j["dimension"].is_number_integer())
    throw ValidationError("'dimension' must be an integer");
  int dim = j["dimension"].get<int>();
  if (dim < 1) throw ValidationError("'dimension' must be >= 1");
  if (!j["terms"].is_array()) throw ValidationError("'terms' must be an array");
  PolyPhase p(dim);
  size_t idx = 0;
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("exp") || !t.contains("num") || !t.contains("den"))
      throw ValidationError("term " + std::to_string(idx) +
                            " must have 'exp', 'num' and 'den'");
    if (!t["exp"].is_array() || t["exp"].size() != static_cast<size_t>(dim))
      throw ValidationError("term " + std::to_string(idx) + ": 'exp' must be an array of " +
                            std::to_string(dim) + " integers");
    Exponent e;
    for (const auto& v : t["exp"]) {
      if (!v.is_number_integer())
        throw ValidationError("term " + std::to_string(idx) + ": exponents must be integers");
      int k = v.get<int>();
      if (k < 0)
        throw ValidationError("term " + std::to_string(idx) + ": exponents must be >= 0");
      e.push_back(k);
    }
    if (p.terms_.count(e))
      throw ValidationError("term " + std::to_string(idx) + ": duplicate exponent vector");
    Rational c = rational_from_json(t["num"], t["den"], idx);
    if (c != 0) p.terms_.emplace(e, c);
    ++idx;
  }
  return p;
}

PolyPhase PolyPhase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open phase file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {
json int_or_string(const mpz_class& z) {
  if (z.fits_slong_p()) return json(static_cast<int64_t>(z.get_si()));
  return json(z.get_str());
}
}  // namespace

std::string PolyPhase::to_json() const {
  json terms = json::array();
  for (const auto& [e, c] : terms_) {
    json t;
    t["exp"] = e;
    t["num"] = int_or_string(c.get_num());
    t["den"] = int_or_string(c.get_den());
    terms.push_back(t);
  }
  json j;
  j["dimension"] = dim_;
  j["terms"] = terms;
  return j.dump(2);
}

std::string PolyPhase::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream ss;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) ss << " + ";
    first = false;
    ss << c.get_str();
    for (int i = 0; i < dim_; ++i) {
      if (e[i] == 0) continue;
      ss << "*x" << (i + 1);
      if (e[i] > 1) ss << "^" << e[i];
    }
  }
  return ss.str();
}

// ------------------------------------------------------------- FlatPoly2

FlatPoly2 flatten2(const PolyPhase& p) {
  if (p.dim() != 2) throw ValidationError("flatten2() requires a 2-variable polynomial");
  FlatPoly2 f;
  for (const auto& [e, c] : p.terms()) {
    if (e[0] > 32 || e[1] > 32)
      throw ValidationError("flatten2(): per-variable degree cap (32) exceeded");
    f.terms.push_back({e[0], e[1], c.get_d()});
    f.max1 = std::max(f.max1, e[0]);
    f.max2 = std::max(f.max2, e[1]);
  }
  return f;
}

double FlatPoly2::operator()(double x, double y) const {
  double px[33], py[33];
  px[0] = 1.0;
  py[0] = 1.0;
  int m1 = std::min(max1, 32), m2 = std::min(max2, 32);
  for (int i = 1; i <= m1; ++i) px[i] = px[i - 1] * x;
  for (int i = 1; i <= m2; ++i) py[i] = py[i - 1] * y;
  double acc = 0.0;
  for (const Term& t : terms) acc += t.c * px[t.e1] * py[t.e2];
  return acc;
}

bool FlatPoly2::separable() const {
  for (const Term& t : terms)
    if (t.e1 > 0 && t.e2 > 0) return false;
  return true;
}

Interval FlatPoly2::bound(const Interval& X, const Interval& Y) const {
  Interval acc(0.0, 0.0);
  for (const Term& t : terms) acc = acc + X.pow(t.e1) * Y.pow(t.e2) * t.c;
  return acc;
}

}  // namespace hesscut
