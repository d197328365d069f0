#pragma once

#include <charconv>
#include <string>

namespace ndcharge {

// Shortest decimal representation that round-trips the exact double, so
// emitted CSV/JSON parses back losslessly and identical runs emit identical
// bytes.
inline std::string format_double(double value) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

}  // namespace ndcharge
