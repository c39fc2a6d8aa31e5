#pragma once

// Internal helpers for deterministic text output. Doubles are printed in
// the shortest form that round-trips, so identical values always produce
// identical bytes.

#include <charconv>
#include <string>
#include <system_error>

namespace qsl_lab::detail {

inline void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

}  // namespace qsl_lab::detail
