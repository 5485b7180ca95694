#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crowdflow/timeutil.hpp"

namespace crowdflow {

struct FrameGeometry {
    int width = 1280;
    int height = 720;
    double fps = 1.0;

    /// Throws Error{validation} unless width, height and fps are positive.
    void validate() const;

    /// Nominal frame count of one interval (step * fps, rounded, at least 1).
    std::size_t frames_per(Seconds step) const;

    bool operator==(const FrameGeometry&) const = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool operator==(const BoundingBox&) const = default;
};

/// Segmentation mask stored as one closed polygon in pixel coordinates.
struct MaskGeometry {
    std::vector<Point> polygon;

    /// Shoelace area (absolute value).
    double area() const;
    bool operator==(const MaskGeometry&) const = default;
};

struct DetectionRecord {
    Timestamp timestamp{};
    int class_id = 0;
    std::string class_name;
    double confidence = 0.0;
    BoundingBox bbox;
    MaskGeometry mask;

    bool operator==(const DetectionRecord&) const = default;
};

/// Column order of a segment CSV.
inline constexpr std::string_view kSegmentCsvHeader =
    "timestamp,class_id,class_name,confidence,x_min,y_min,x_max,y_max,mask";

struct RowIssue {
    std::size_t row = 0;  // 1-based data row (header excluded)
    std::string field;    // empty when the whole row is malformed
    std::string message;
};

struct ParseOptions {
    /// Drop malformed rows instead of failing; each dropped row is reported to `on_skip`.
    bool skip_bad_rows = false;
    std::function<void(const RowIssue&)> on_skip;
};

/// Throws Error{validation} naming the first offending field.
void validate_record(const DetectionRecord& record, const FrameGeometry& geometry);

/// Parses one segment CSV. Records come back in file order.
/// Errors: Error{schema} on header mismatch; Error{validation} on a bad row
/// (row number and field in the message and context) unless skip_bad_rows.
std::vector<DetectionRecord> parse_segment_csv(std::string_view content, const FrameGeometry& geometry,
                                               const ParseOptions& options = {});

/// Inverse of parse_segment_csv (header included, `\n` line endings).
std::string serialize_segment_csv(const std::vector<DetectionRecord>& records);

/// `[(x1,y1),(x2,y2),...]`
std::string format_mask(const MaskGeometry& mask);
MaskGeometry parse_mask(std::string_view text);

std::vector<DetectionRecord> filter_by_class(const std::vector<DetectionRecord>& records,
                                             const std::set<std::string>& allowed_class_names);

struct SegmentFile {
    Timestamp start{};
    std::filesystem::path path;
};

/// Segment files (`YYYYMMDD_HHMM.csv`) in `dir`, sorted by start time. Other files are ignored.
std::vector<SegmentFile> list_segment_files(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Minimal RFC 4180 field splitter (quotes, doubled-quote escapes).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace crowdflow
