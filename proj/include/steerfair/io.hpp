#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "steerfair/common.hpp"

namespace steerfair {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// Line-buffered CSV writer with LF endings regardless of platform.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open output file: " + path.string());
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

/// key = value manifest lines (a TOML-compatible structured text file).
class ManifestWriter {
 public:
  explicit ManifestWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open manifest file: " + path.string());
  }

  void set(const std::string& key, const std::string& value) {
    out_ << key << " = \"" << value << "\"\n";
  }
  void set(const std::string& key, double value) {
    out_ << key << " = " << format_double(value) << '\n';
  }
  void set(const std::string& key, std::int64_t value) {
    out_ << key << " = " << value << '\n';
  }
  void set(const std::string& key, bool value) {
    out_ << key << " = " << (value ? "true" : "false") << '\n';
  }
  void raw(const std::string& line) { out_ << line << '\n'; }

 private:
  std::ofstream out_;
};

}  // namespace steerfair
