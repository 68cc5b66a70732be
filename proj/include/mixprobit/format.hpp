#pragma once

#include <charconv>
#include <string>

namespace mixprobit {

// 17 significant digits: enough for every double to round-trip exactly.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace mixprobit
