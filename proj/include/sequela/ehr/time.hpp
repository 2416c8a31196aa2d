#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sequela::ehr {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

/// Parses `YYYY-MM-DDTHH:MM:SSZ`. Throws std::invalid_argument otherwise.
Timestamp parse_timestamp(std::string_view text);

/// Inverse of parse_timestamp.
std::string format_timestamp(Timestamp t);

inline double to_days(Timestamp seconds) {
  return static_cast<double>(seconds) / static_cast<double>(kSecondsPerDay);
}

}  // namespace sequela::ehr
