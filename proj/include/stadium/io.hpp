#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "stadium/errors.hpp"

// Deterministic text formatting for the CLI artifacts: floats are always
// rendered with 15 significant digits and a '.' decimal separator,
// independent of locale, so identical runs produce byte-identical output.

namespace stadium {

inline std::string format_double(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, res.ptr);
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

/// Minimal JSON string escaping (the artifacts only emit plain identifiers,
/// but word lists in error reports may carry arbitrary text).
inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string json_string(const std::string& s) {
  return "\"" + json_escape(s) + "\"";
}

inline std::string json_int_array(const std::vector<int>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  return out + "\n";
}

}  // namespace stadium
