#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace music {

/// Shortest-round-trip-safe rendering with 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace music
