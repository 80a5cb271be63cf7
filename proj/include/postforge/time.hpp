#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace postforge {

/// UTC instant with one-second resolution. Stored and serialized as Unix
/// epoch seconds, which is what the Stack Exchange API reports.
using Timestamp = std::chrono::sys_seconds;

inline Timestamp from_epoch(std::int64_t seconds) {
  return Timestamp{std::chrono::seconds{seconds}};
}

inline std::int64_t to_epoch(Timestamp t) { return t.time_since_epoch().count(); }

constexpr std::chrono::seconds days(std::int64_t n) { return std::chrono::seconds{n * 86400}; }
constexpr std::chrono::seconds hours(std::int64_t n) { return std::chrono::seconds{n * 3600}; }

/// Parses "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS[Z]". Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

/// Parses durations like "90d", "6h", "30m", "45s" or a bare number of seconds.
std::chrono::seconds parse_duration(std::string_view text);

}  // namespace postforge
