#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace skel {

/// Wall-clock instant, UTC, millisecond resolution. Simulated clocks and
/// sensor logs share this type.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Duration = std::chrono::milliseconds;

/// Monday 2023-10-02 00:00 UTC; the default simulated study start.
Timestamp default_study_start();

/// Formats as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string format_iso(Timestamp t);
/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff][Z]". Throws DataError on malformed input.
Timestamp parse_iso(std::string_view s);

/// Fractional hour of day in [0, 24).
double hour_of_day(Timestamp t);
/// Minutes since midnight.
int minute_of_day(Timestamp t);
/// ISO weekday, Monday = 1 ... Sunday = 7.
unsigned iso_weekday(Timestamp t);
Timestamp start_of_day(Timestamp t);

inline Duration from_minutes(std::int64_t m) { return std::chrono::minutes(m); }
inline Duration hours_to_duration(double h) {
    return Duration(static_cast<std::int64_t>(h * 3'600'000.0 + 0.5));
}

}  // namespace skel
