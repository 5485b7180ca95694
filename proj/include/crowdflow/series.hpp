#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crowdflow/ingest.hpp"
#include "crowdflow/timeutil.hpp"

namespace crowdflow {

enum class SeriesKind { count, saturation };

const char* to_string(SeriesKind kind);
SeriesKind parse_series_kind(std::string_view text);

/// Regular series: value i belongs to [start + i*step, start + (i+1)*step).
struct IntervalSeries {
    Timestamp start{};
    Seconds step = kQuarterHour;
    std::vector<double> values;
    SeriesKind kind = SeriesKind::count;
    /// Indices of intervals that had no segment file and were zero-filled.
    std::vector<std::size_t> gaps;

    std::size_t size() const { return values.size(); }
    Timestamp time_at(std::size_t i) const { return start + step * static_cast<std::int64_t>(i); }

    /// Throws Error{validation} if values break the kind's range (finite; count: integer >= 0; saturation: [0, 1]).
    void validate() const;
};

/// Half-open time window [start, end).
struct TimeWindow {
    Timestamp start{};
    Timestamp end{};
};

/// Throws Error{alignment} unless both ends sit on the step grid and end >= start.
void check_window(const TimeWindow& window, Seconds step);

/// Number of records per distinct timestamp (one timestamp = one frame).
std::map<Timestamp, std::size_t> per_frame_counts(const std::vector<DetectionRecord>& records);

/// Per-interval maximum of per-frame counts; 0 where an interval has no detections.
/// Records outside the window are ignored.
IntervalSeries count_series(const std::vector<DetectionRecord>& records, const TimeWindow& window,
                            Seconds step = kQuarterHour);

/// Occupancy accumulated over one interval. `occupied_frames[cell]` counts the
/// frames in which at least one mask covered the cell (masks of one frame are unioned).
struct Heatmap {
    int width = 0;
    int height = 0;
    std::size_t frames = 1;
    std::vector<std::uint32_t> occupied_frames;

    /// Normalized cell value 255 * occupied / frames, in [0, 255].
    double value(int x, int y) const {
        return 255.0 * static_cast<double>(occupied_frames[static_cast<std::size_t>(y) * width + x]) /
               static_cast<double>(frames);
    }
    std::uint64_t total_occupancy() const;
};

/// Throws Error{validation} for frames == 0 or more distinct frames than `frames`,
/// Error{geometry} for a mask that does not fit the frame.
Heatmap accumulate_heatmap(const std::vector<DetectionRecord>& records, const FrameGeometry& geometry,
                           std::size_t frames);

/// Sum of normalized cells divided by width * height * 255.
double saturation_value(const Heatmap& heatmap, const FrameGeometry& geometry);

/// Parsed content of one segment file.
struct Segment {
    Timestamp start{};
    std::vector<DetectionRecord> records;
};

/// One saturation value per interval from that interval's segment. Intervals
/// without a segment are zero-filled and listed in `gaps`.
IntervalSeries heatmap_series(const std::vector<Segment>& segments, const TimeWindow& window,
                              const FrameGeometry& geometry, Seconds step = kQuarterHour, unsigned workers = 1);

/// Both series over the same window with shared gap flags.
struct SeriesPair {
    IntervalSeries count;
    IntervalSeries saturation;
};

SeriesPair build_series(const std::vector<Segment>& segments, const TimeWindow& window,
                        const FrameGeometry& geometry, Seconds step = kQuarterHour, unsigned workers = 1);

/// `timestamp,value` CSV.
std::string series_to_csv(const IntervalSeries& series);

/// Sidecar metadata (`key=value` lines): kind, step_seconds, start, length, geometry, gaps.
std::string series_metadata(const IntervalSeries& series, const FrameGeometry* geometry = nullptr);

/// Rebuilds a series from its CSV and sidecar; throws Error{validation} on inconsistencies.
IntervalSeries series_from_files(const std::string& csv, const std::string& metadata);

/// Reads `<stem>.csv` and `<stem>.meta`.
IntervalSeries load_series(const std::filesystem::path& csv_path);
void save_series(const IntervalSeries& series, const std::filesystem::path& csv_path,
                 const FrameGeometry* geometry = nullptr);

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace crowdflow
