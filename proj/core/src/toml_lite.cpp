#include "kcl/toml_lite.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kcl/errors.hpp"

namespace kcl {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strips a trailing comment, honoring quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(const std::string& origin, size_t line_no, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
}

std::string parse_quoted(const std::string& raw, const std::string& origin, size_t line_no) {
  if (raw.size() < 2 || raw.back() != '"') fail(origin, line_no, "unterminated string");
  std::string out;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\\' && i + 2 < raw.size()) {
      const char n = raw[++i];
      switch (n) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(origin, line_no, std::string("unsupported escape \\") + n);
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

bool looks_like_int(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

TomlLite::Value parse_scalar(const std::string& raw, const std::string& origin, size_t line_no) {
  if (!raw.empty() && raw.front() == '"') return parse_quoted(raw, origin, line_no);
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (looks_like_int(raw)) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec == std::errc() && p == raw.data() + raw.size()) return v;
  }
  try {
    size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used == raw.size()) return v;
  } catch (...) {
  }
  fail(origin, line_no, "cannot parse value '" + raw + "'");
}

std::vector<std::string> split_array_items(const std::string& inner, const std::string& origin,
                                           size_t line_no) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (size_t i = 0; i < inner.size(); ++i) {
    const char c = inner[i];
    if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_string = !in_string;
    if (c == ',' && !in_string) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  for (const auto& it : items)
    if (it.empty()) fail(origin, line_no, "empty array element");
  return items;
}

TomlLite::Value parse_array(const std::string& raw, const std::string& origin, size_t line_no) {
  const std::string inner = trim(raw.substr(1, raw.size() - 2));
  auto items = split_array_items(inner, origin, line_no);
  if (items.empty()) return std::vector<std::string>{};

  if (items.front().front() == '"') {
    std::vector<std::string> out;
    for (const auto& it : items) out.push_back(parse_quoted(it, origin, line_no));
    return out;
  }
  if (std::all_of(items.begin(), items.end(), looks_like_int)) {
    std::vector<int64_t> out;
    for (const auto& it : items)
      out.push_back(std::get<int64_t>(parse_scalar(it, origin, line_no)));
    return out;
  }
  std::vector<double> out;
  for (const auto& it : items) {
    const auto v = parse_scalar(it, origin, line_no);
    if (std::holds_alternative<double>(v)) out.push_back(std::get<double>(v));
    else if (std::holds_alternative<int64_t>(v)) out.push_back(static_cast<double>(std::get<int64_t>(v)));
    else fail(origin, line_no, "mixed array types");
  }
  return out;
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

}  // namespace

TomlLite TomlLite::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

TomlLite TomlLite::parse_string(const std::string& text, const std::string& origin) {
  TomlLite out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!valid_key(section)) fail(origin, line_no, "invalid section name '" + section + "'");
      continue;
    }
    const size_t eq = body.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string raw = trim(body.substr(eq + 1));
    if (!valid_key(key)) fail(origin, line_no, "invalid key '" + key + "'");
    if (raw.empty()) fail(origin, line_no, "missing value for '" + key + "'");

    const std::string full = section.empty() ? key : section + "." + key;
    if (out.values_.count(full)) fail(origin, line_no, "duplicate key '" + full + "'");
    if (raw.front() == '[') {
      if (raw.back() != ']') fail(origin, line_no, "unterminated array");
      out.values_.emplace(full, parse_array(raw, origin, line_no));
    } else {
      out.values_.emplace(full, parse_scalar(raw, origin, line_no));
    }
  }
  return out;
}

const TomlLite::Value* TomlLite::find(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

std::string TomlLite::get_string(const std::string& key, const std::string& fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* s = std::get_if<std::string>(v)) return *s;
  throw ConfigError(origin_ + ": key '" + key + "' is not a string");
}

int64_t TomlLite::get_int(const std::string& key, int64_t fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* i = std::get_if<int64_t>(v)) return *i;
  throw ConfigError(origin_ + ": key '" + key + "' is not an integer");
}

double TomlLite::get_double(const std::string& key, double fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* d = std::get_if<double>(v)) return *d;
  if (auto* i = std::get_if<int64_t>(v)) return static_cast<double>(*i);
  throw ConfigError(origin_ + ": key '" + key + "' is not a number");
}

bool TomlLite::get_bool(const std::string& key, bool fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* b = std::get_if<bool>(v)) return *b;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean");
}

std::vector<std::string> TomlLite::get_string_array(const std::string& key,
                                                    std::vector<std::string> fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* a = std::get_if<std::vector<std::string>>(v)) return *a;
  throw ConfigError(origin_ + ": key '" + key + "' is not a string array");
}

std::vector<std::string> TomlLite::unconsumed_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!consumed_.count(k)) out.push_back(k);
  return out;
}

void TomlLite::reject_unconsumed() const {
  const auto leftover = unconsumed_keys();
  if (leftover.empty()) return;
  std::string msg = origin_ + ": unknown config keys:";
  for (const auto& k : leftover) msg += " " + k;
  throw ConfigError(msg);
}

}  // namespace kcl
