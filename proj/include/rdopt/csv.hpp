#pragma once

#include <cstdio>
#include <string>

namespace rdopt {

/// 17 significant digits: lossless double round-trip for golden files.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace rdopt
