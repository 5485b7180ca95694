#include "crowdflow/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crowdflow/error.hpp"

namespace crowdflow {

namespace fs = std::filesystem;

void FrameGeometry::validate() const {
    if (width <= 0) throw Error(ErrorKind::validation, "frame width must be positive", "width");
    if (height <= 0) throw Error(ErrorKind::validation, "frame height must be positive", "height");
    if (!(fps > 0.0) || !std::isfinite(fps)) throw Error(ErrorKind::validation, "fps must be positive", "fps");
}

std::size_t FrameGeometry::frames_per(Seconds step) const {
    const double frames = std::round(static_cast<double>(step.count()) * fps);
    return frames < 1.0 ? 1 : static_cast<std::size_t>(frames);
}

double MaskGeometry::area() const {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        twice += polygon[j].x * polygon[i].y - polygon[i].x * polygon[j].y;
    }
    return std::abs(twice) * 0.5;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

namespace {

[[noreturn]] void fail_field(const std::string& field, const std::string& message) {
    throw Error(ErrorKind::validation, field + ": " + message, field);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view text, const std::string& field) {
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        fail_field(field, "not a number: '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) fail_field(field, "not finite");
    return value;
}

int parse_int(std::string_view text, const std::string& field) {
    text = trim(text);
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        fail_field(field, "not an integer: '" + std::string(text) + "'");
    }
    return value;
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

DetectionRecord parse_row(const std::vector<std::string>& fields) {
    if (fields.size() != 9) {
        throw Error(ErrorKind::validation, "expected 9 fields, found " + std::to_string(fields.size()));
    }
    DetectionRecord r;
    auto ts = parse_iso8601(trim(fields[0]));
    if (!ts) fail_field("timestamp", "not an ISO-8601 timestamp: '" + fields[0] + "'");
    r.timestamp = *ts;
    r.class_id = parse_int(fields[1], "class_id");
    r.class_name = std::string(trim(fields[2]));
    r.confidence = parse_real(fields[3], "confidence");
    r.bbox.x_min = parse_real(fields[4], "x_min");
    r.bbox.y_min = parse_real(fields[5], "y_min");
    r.bbox.x_max = parse_real(fields[6], "x_max");
    r.bbox.y_max = parse_real(fields[7], "y_max");
    try {
        r.mask = parse_mask(fields[8]);
    } catch (const Error& e) {
        fail_field("mask", e.what());
    }
    return r;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    if (in_quotes) throw Error(ErrorKind::validation, "unterminated quoted field");
    fields.push_back(std::move(current));
    return fields;
}

std::string format_mask(const MaskGeometry& mask) {
    std::string out = "[";
    for (std::size_t i = 0; i < mask.polygon.size(); ++i) {
        if (i) out += ',';
        out += '(' + format_double(mask.polygon[i].x) + ',' + format_double(mask.polygon[i].y) + ')';
    }
    out += ']';
    return out;
}

MaskGeometry parse_mask(std::string_view text) {
    text = trim(text);
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
        throw Error(ErrorKind::validation, "polygon must be written as [(x,y),...]");
    }
    text = text.substr(1, text.size() - 2);
    MaskGeometry mask;
    std::size_t pos = 0;
    while (true) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == ',')) ++pos;
        if (pos >= text.size()) break;
        if (text[pos] != '(') throw Error(ErrorKind::validation, "expected '(' in polygon");
        const std::size_t close = text.find(')', pos);
        if (close == std::string_view::npos) throw Error(ErrorKind::validation, "unbalanced '(' in polygon");
        const std::string_view pair = text.substr(pos + 1, close - pos - 1);
        const std::size_t comma = pair.find(',');
        if (comma == std::string_view::npos) throw Error(ErrorKind::validation, "vertex needs two coordinates");
        Point p;
        p.x = parse_real(pair.substr(0, comma), "mask.x");
        p.y = parse_real(pair.substr(comma + 1), "mask.y");
        mask.polygon.push_back(p);
        pos = close + 1;
    }
    return mask;
}

void validate_record(const DetectionRecord& r, const FrameGeometry& geometry) {
    if (r.class_id < 0) fail_field("class_id", "must be non-negative");
    if (r.class_name.empty()) fail_field("class_name", "must not be empty");
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
        fail_field("confidence", "must lie in [0,1], got " + format_double(r.confidence));
    }
    const double w = geometry.width;
    const double h = geometry.height;
    if (!(r.bbox.x_min < r.bbox.x_max)) fail_field("x_max", "x_min must be < x_max");
    if (!(r.bbox.y_min < r.bbox.y_max)) fail_field("y_max", "y_min must be < y_max");
    if (r.bbox.x_min < 0.0 || r.bbox.x_min > w) fail_field("x_min", "outside frame");
    if (r.bbox.x_max < 0.0 || r.bbox.x_max > w) fail_field("x_max", "outside frame");
    if (r.bbox.y_min < 0.0 || r.bbox.y_min > h) fail_field("y_min", "outside frame");
    if (r.bbox.y_max < 0.0 || r.bbox.y_max > h) fail_field("y_max", "outside frame");
    if (r.mask.polygon.size() < 3) fail_field("mask", "polygon needs at least 3 vertices");
    for (const Point& p : r.mask.polygon) {
        if (p.x < 0.0 || p.x > w || p.y < 0.0 || p.y > h) {
            fail_field("mask", "vertex (" + format_double(p.x) + "," + format_double(p.y) + ") outside frame");
        }
    }
    if (!(r.mask.area() > 0.0)) fail_field("mask", "polygon has zero area");
}

std::vector<DetectionRecord> parse_segment_csv(std::string_view content, const FrameGeometry& geometry,
                                               const ParseOptions& options) {
    geometry.validate();
    if (content.size() >= 3 && static_cast<unsigned char>(content[0]) == 0xEF &&
        static_cast<unsigned char>(content[1]) == 0xBB && static_cast<unsigned char>(content[2]) == 0xBF) {
        content.remove_prefix(3);
    }

    std::vector<DetectionRecord> records;
    std::size_t pos = 0;
    bool header_seen = false;
    std::size_t row = 0;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) {
            if (eol == content.size()) break;
            continue;
        }

        if (!header_seen) {
            if (line != kSegmentCsvHeader) {
                throw Error(ErrorKind::schema,
                            "header mismatch: expected '" + std::string(kSegmentCsvHeader) + "', got '" +
                                std::string(line) + "'",
                            "header");
            }
            header_seen = true;
            continue;
        }

        ++row;
        try {
            DetectionRecord rec = parse_row(split_csv_line(line));
            validate_record(rec, geometry);
            records.push_back(std::move(rec));
        } catch (const Error& e) {
            RowIssue issue{row, e.context(), e.what()};
            if (!options.skip_bad_rows) {
                throw Error(e.kind(), "row " + std::to_string(row) + ": " + e.what(),
                            "row " + std::to_string(row) + (e.context().empty() ? "" : " " + e.context()));
            }
            if (options.on_skip) options.on_skip(issue);
        }
        if (eol == content.size()) break;
    }
    if (!header_seen) throw Error(ErrorKind::schema, "missing header row", "header");
    return records;
}

std::string serialize_segment_csv(const std::vector<DetectionRecord>& records) {
    std::string out(kSegmentCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += format_iso8601(r.timestamp);
        out += ',' + std::to_string(r.class_id);
        out += ',' + (needs_quotes(r.class_name) ? quote(r.class_name) : r.class_name);
        out += ',' + format_double(r.confidence);
        out += ',' + format_double(r.bbox.x_min);
        out += ',' + format_double(r.bbox.y_min);
        out += ',' + format_double(r.bbox.x_max);
        out += ',' + format_double(r.bbox.y_max);
        out += ',' + quote(format_mask(r.mask));
        out += '\n';
    }
    return out;
}

std::vector<DetectionRecord> filter_by_class(const std::vector<DetectionRecord>& records,
                                             const std::set<std::string>& allowed_class_names) {
    std::vector<DetectionRecord> out;
    for (const auto& r : records) {
        if (allowed_class_names.count(r.class_name)) out.push_back(r);
    }
    return out;
}

std::vector<SegmentFile> list_segment_files(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::io, "not a directory: " + dir.string(), dir.string());
    std::vector<SegmentFile> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".csv") continue;
        if (auto start = parse_segment_file_name(name)) files.push_back({*start, entry.path()});
    }
    std::sort(files.begin(), files.end(), [](const SegmentFile& a, const SegmentFile& b) { return a.start < b.start; });
    return files;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string(), path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string(), path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string(), path.string());
}

}  // namespace crowdflow
