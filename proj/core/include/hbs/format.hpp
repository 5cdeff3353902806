#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace hbs {

/// Shortest decimal that round-trips, independent of locale. NaN -> "NA".
inline std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace hbs
