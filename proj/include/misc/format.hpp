#pragma once

#include <cstdio>
#include <string>

namespace misc {

/// Shortest round-trippable-enough text for CSV output (%.9g).
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace misc
