#pragma once

#include <cstdio>
#include <string>

namespace barrier {

/// Shortest text for v with 17 significant digits ("%.17g").
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace barrier
