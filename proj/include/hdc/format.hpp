#pragma once

// Shortest round-trip formatting for config snapshots and reports.

#include <charconv>
#include <string>

namespace hdc {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace hdc
