#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace mixphase {

/// Locale-independent rendering with 17 significant digits and a lowercase
/// exponent marker, e.g. "0.19557032470131405" or "1.0000000000000001e-05".
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace mixphase
