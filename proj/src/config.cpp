#include "hesscut/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hesscut/common.hpp"

namespace hesscut {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool known_key(const std::string& k) {
  for (const ConfigKey& e : config_registry())
    if (e.name == k) return true;
  return false;
}

}  // namespace

const std::vector<ConfigKey>& config_registry() {
  static const std::vector<ConfigKey> keys = {
      {"quad.rel_tol", "1e-8", "relative tolerance of the panel quadrature"},
      {"quad.abs_tol", "1e-13", "absolute tolerance of the panel quadrature"},
      {"quad.gl_order", "12", "Gauss-Legendre order per panel"},
      {"quad.gl_order_check", "18", "comparison order for error estimates"},
      {"quad.max_passes", "6", "budget-halving refinement passes"},
      {"quad.max_nodes", "80000000", "node budget per integral"},
      {"quad.lambda_cap_2d", "4096", "largest admitted 2-D frequency"},
      {"quad.lambda_cap_1d", "65536", "largest admitted 1-D frequency"},
      {"quad.parallel", "true", "parallel panel loop (false = serial reference)"},
      {"scan.coarse", "17", "coarse tilt-grid points per axis"},
      {"scan.refine", "9", "refinement tilt-grid points per axis"},
      {"scan.passes", "2", "local refinement passes around the argmax"},
      {"scan.margin", "0.5", "margin added to the -grad range for the tilt box"},
      {"scan.lmin", "4", "smallest dyadic frequency exponent of the scan grid"},
      {"scan.lmax", "11", "largest dyadic frequency exponent of the scan grid"},
      {"scan.emin", "-8", "smallest dyadic cutoff exponent of the scan grid"},
      {"scan.emax", "-2", "largest dyadic cutoff exponent of the scan grid"},
      {"chi.two_sided", "true", "cutoff window on both signs of the Hessian"},
      {"psi.radius", "0.5", "half-width of the standard product amplitude"},
      {"out.path", "-", "output path for CSV payloads (- = stdout)"},
      {"boxes.c_edge", "2", "half-width of the edge bands in box index units"},
      {"boxes.j_max", "16", "largest dyadic box index per axis"},
      {"whitney.box_half", "2", "half-width of the fold-check region"},
      {"whitney.margin", "0.125", "half-width of the axis exclusion strips"},
      {"whitney.density", "32", "root-search grid lines per unit length"},
      {"whitney.tau1", "1e-8", "scaled threshold for the gradient hypothesis"},
      {"whitney.tau2", "1e-8", "scaled threshold for differential injectivity"},
      {"fold.samples", "33", "samples per traced fold branch"},
      {"fold.window", "1", "half-width of the tracing window"},
  };
  return keys;
}

std::string config_docs() {
  std::ostringstream os;
  for (const ConfigKey& e : config_registry())
    os << e.name << " = " << e.dflt << "  # " << e.doc << "\n";
  return os.str();
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(no) +
                            ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ValidationError("config line " + std::to_string(no) +
                            ": empty key or value");
    if (!known_key(key))
      throw ValidationError("config line " + std::to_string(no) +
                            ": unknown key '" + key + "'");
    c.kv_[key] = val;  // last assignment wins
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

double Config::get_double(const std::string& key, double dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  const std::string& s = it->second;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ValidationError("config key '" + key + "': '" + s +
                          "' is not a number");
  return v;
}

long Config::get_long(const std::string& key, long dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  const std::string& s = it->second;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ValidationError("config key '" + key + "': '" + s +
                          "' is not an integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ValidationError("config key '" + key + "': expected true or false");
}

std::string Config::get_string(const std::string& key,
                               const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

}  // namespace hesscut
