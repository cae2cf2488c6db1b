#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace ebrake {

/// Locale-independent CSV number formatting (12 significant digits).
inline std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);
  return buf;
}

/// Shortest representation that round-trips exactly (used in config dumps).
inline std::string exact_number(double value) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

}  // namespace ebrake
