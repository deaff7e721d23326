#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace aqad {

// UTC instants at one-second resolution. Core never does local-time math.
using Instant = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

Instant parse_iso8601(std::string_view text);
std::string format_iso8601(Instant t);

// Largest multiple of `interval` since the epoch that is <= t.
Instant floor_to_interval(Instant t, Duration interval);

inline std::int64_t to_epoch_seconds(Instant t) { return t.time_since_epoch().count(); }
inline Instant from_epoch_seconds(std::int64_t s) { return Instant{Duration{s}}; }

}  // namespace aqad
