#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace kcl {

// Minimal TOML reader covering what the run/corpus config files use:
// comments, [section] tables one level deep, and key = scalar | array.
// Scalars are strings, integers, floats and booleans. Keys are reported as
// "section.key". Unknown keys are surfaced via unconsumed_keys() so config
// typos fail loudly instead of silently using defaults.
class TomlLite {
 public:
  using Value = std::variant<std::string, int64_t, double, bool, std::vector<std::string>,
                             std::vector<int64_t>, std::vector<double>>;

  static TomlLite parse_file(const std::string& path);
  static TomlLite parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  int64_t get_int(const std::string& key, int64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<std::string> get_string_array(const std::string& key,
                                            std::vector<std::string> fallback = {});

  // Keys present in the file that no getter has touched.
  std::vector<std::string> unconsumed_keys() const;
  // Throws ConfigError naming the leftover keys, if any.
  void reject_unconsumed() const;

 private:
  const Value* find(const std::string& key);
  std::map<std::string, Value> values_;
  std::set<std::string> consumed_;
  std::string origin_;
};

}  // namespace kcl
