#pragma once

#include <cstdio>
#include <string>

namespace polaron {

// Fixed 12-significant-digit formatting for CSV output; stable across runs.
inline std::string sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace polaron
