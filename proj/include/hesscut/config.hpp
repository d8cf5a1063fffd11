#pragma once

#include <map>
#include <string>
#include <vector>

namespace hesscut {

// Flat key = value experiment manifest. Lines are blank, comments (leading
// '#'), or `key = value`. Keys must belong to the documented registry below;
// unknown keys are rejected so a typo cannot silently fall back to a default.
// Values never embed timestamps or machine identity, so a manifest plus a
// phase file reproduces a run bit for bit.
struct Config {
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  double get_double(const std::string& key, double dflt) const;
  long get_long(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

struct ConfigKey {
  std::string name;
  std::string dflt;
  std::string doc;
};

// The registry of accepted keys with documented defaults.
const std::vector<ConfigKey>& config_registry();

// One "key = default  # doc" line per registry entry, for --help output.
std::string config_docs();

}  // namespace hesscut
