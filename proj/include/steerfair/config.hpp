#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "steerfair/common.hpp"

namespace steerfair::toml {

/// Minimal TOML subset: [section] / [a.b] headers, key = value pairs,
/// strings, integers, floats, booleans, single-line homogeneous arrays and
/// # comments. Enough for the config schema; anything else is a ConfigError.
struct Value {
  std::variant<std::string, std::int64_t, double, bool, std::vector<Value>> data;
  int line = 0;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<std::vector<Value>>(data); }
};

class Table {
 public:
  static Table parse(const std::string& text);
  static Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_string()) throw ConfigError(key + " must be a string");
    return std::get<std::string>(v.data);
  }

  std::int64_t get_int(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_int()) throw ConfigError(key + " must be an integer");
    return std::get<std::int64_t>(v.data);
  }

  double get_double(const std::string& key) const {
    const Value& v = require(key);
    if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.data));
    if (!v.is_float()) throw ConfigError(key + " must be a number");
    return std::get<double>(v.data);
  }

  bool get_bool(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_bool()) throw ConfigError(key + " must be a boolean");
    return std::get<bool>(v.data);
  }

  std::vector<double> get_double_array(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_array()) throw ConfigError(key + " must be an array");
    std::vector<double> out;
    for (const Value& e : std::get<std::vector<Value>>(v.data)) {
      if (e.is_int())
        out.push_back(static_cast<double>(std::get<std::int64_t>(e.data)));
      else if (e.is_float())
        out.push_back(std::get<double>(e.data));
      else
        throw ConfigError(key + " must be a numeric array");
    }
    return out;
  }

  std::vector<std::string> get_string_array(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_array()) throw ConfigError(key + " must be an array");
    std::vector<std::string> out;
    for (const Value& e : std::get<std::vector<Value>>(v.data)) {
      if (!e.is_string()) throw ConfigError(key + " must be a string array");
      out.push_back(std::get<std::string>(e.data));
    }
    return out;
  }

  // Defaulted lookups.
  std::string get_string_or(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_string(key) : dflt;
  }
  std::int64_t get_int_or(const std::string& key, std::int64_t dflt) const {
    return has(key) ? get_int(key) : dflt;
  }
  double get_double_or(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }
  bool get_bool_or(const std::string& key, bool dflt) const {
    return has(key) ? get_bool(key) : dflt;
  }

  /// Keys never read through a getter; used to reject typos.
  std::vector<std::string> unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!read_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, Value>& entries() const { return values_; }

 private:
  const Value& require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    read_.insert(key);
    return it->second;
  }

  std::map<std::string, Value> values_;
  mutable std::set<std::string> read_;

  friend Table parse_impl(const std::string&);
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Value parse_scalar(const std::string& raw, int line);

inline Value parse_value(const std::string& raw, int line) {
  const std::string s = strip(raw);
  if (s.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value");
  if (s.front() == '[') {
    if (s.back() != ']')
      throw ConfigError("line " + std::to_string(line) + ": unterminated array");
    Value v;
    v.line = line;
    std::vector<Value> items;
    std::string body = s.substr(1, s.size() - 2);
    std::string cur;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!strip(cur).empty()) items.push_back(parse_scalar(strip(cur), line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!strip(cur).empty()) items.push_back(parse_scalar(strip(cur), line));
    v.data = std::move(items);
    return v;
  }
  return parse_scalar(s, line);
}

inline Value parse_scalar(const std::string& s, int line) {
  Value v;
  v.line = line;
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size() && (s[i + 1] == '"' || s[i + 1] == '\\')) {
        out += s[i + 1];
        ++i;
      } else {
        out += s[i];
      }
    }
    v.data = out;
    return v;
  }
  if (s == "true" || s == "false") {
    v.data = (s == "true");
    return v;
  }
  // Numbers: integer when it parses fully without . e E; float otherwise.
  const bool looks_float = s.find_first_of(".eE") != std::string::npos &&
                           s.find_first_not_of("+-0123456789.eE") == std::string::npos;
  errno = 0;
  char* end = nullptr;
  if (!looks_float) {
    const long long i = std::strtoll(s.c_str(), &end, 10);
    if (end && *end == '\0' && errno == 0) {
      v.data = static_cast<std::int64_t>(i);
      return v;
    }
  }
  errno = 0;
  const double d = std::strtod(s.c_str(), &end);
  if (end && *end == '\0' && errno == 0) {
    v.data = d;
    return v;
  }
  throw ConfigError("line " + std::to_string(line) + ": cannot parse value '" + s + "'");
}

}  // namespace detail

inline Table Table::parse(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Drop comments outside strings.
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    const std::string s = detail::strip(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = detail::strip(s.substr(1, s.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::strip(s.substr(0, eq));
    if (key.empty() ||
        key.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": bad key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (t.values_.count(full))
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + full);
    t.values_[full] = detail::parse_value(s.substr(eq + 1), line_no);
  }
  return t;
}

}  // namespace steerfair::toml
