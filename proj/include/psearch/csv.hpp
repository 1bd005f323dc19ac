#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

#include "psearch/errors.hpp"

namespace psearch {

// 17 significant digits: doubles round-trip exactly, so reruns diff clean.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt17(long long v) { return std::to_string(v); }
inline std::string fmt17(long v) { return std::to_string(v); }
inline std::string fmt17(unsigned long long v) { return std::to_string(v); }

class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open output file: " + path.string());
  }

  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const std::string& c : cells) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace psearch
