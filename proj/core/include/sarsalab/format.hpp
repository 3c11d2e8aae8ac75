#pragma once

#include <cstdio>
#include <string>

namespace sarsalab {

/// Canonical 17-significant-digit decimal rendering; byte-stable, and
/// write(read(text)) == text for text this renderer produced.
inline std::string format_g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace sarsalab
