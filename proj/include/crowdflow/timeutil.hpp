#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace crowdflow {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

inline constexpr Seconds kQuarterHour{15 * 60};

/// Parses `YYYY-MM-DDTHH:MM:SS` with an optional `Z` or `+HH:MM`/`-HH:MM`
/// suffix (a space may replace the `T`). A missing offset means UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Canonical form `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp t);

/// Segment file stem `YYYYMMDD_HHMM` for the segment starting at `t`.
std::string segment_file_stem(Timestamp t);

/// Inverse of segment_file_stem; accepts a bare stem or a `*.csv` file name.
std::optional<Timestamp> parse_segment_file_name(std::string_view name);

/// Monday = 0 ... Sunday = 6 (UTC calendar).
int weekday_monday0(Timestamp t);
int hour_of_day(Timestamp t);
int minute_of_hour(Timestamp t);

/// True when `t` is a whole multiple of `step` since the Unix epoch.
bool is_aligned(Timestamp t, Seconds step);

}  // namespace crowdflow
