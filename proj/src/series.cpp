#include "crowdflow/series.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include "crowdflow/error.hpp"
#include "crowdflow/raster.hpp"

namespace crowdflow {

namespace fs = std::filesystem;

const char* to_string(SeriesKind kind) { return kind == SeriesKind::count ? "count" : "saturation"; }

SeriesKind parse_series_kind(std::string_view text) {
    if (text == "count") return SeriesKind::count;
    if (text == "saturation") return SeriesKind::saturation;
    throw Error(ErrorKind::validation, "unknown series kind '" + std::string(text) + "'", "kind");
}

void IntervalSeries::validate() const {
    if (step.count() <= 0) throw Error(ErrorKind::validation, "series step must be positive", "step");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const std::string where = "value[" + std::to_string(i) + "]";
        if (!std::isfinite(v)) throw Error(ErrorKind::validation, where + " is not finite", where);
        if (kind == SeriesKind::count && (v < 0.0 || v != std::floor(v))) {
            throw Error(ErrorKind::validation, where + " is not a non-negative integer count", where);
        }
        if (kind == SeriesKind::saturation && (v < 0.0 || v > 1.0)) {
            throw Error(ErrorKind::validation, where + " is outside [0,1]", where);
        }
    }
}

void check_window(const TimeWindow& window, Seconds step) {
    if (step.count() <= 0) throw Error(ErrorKind::alignment, "step must be positive", "step");
    if (window.end < window.start) throw Error(ErrorKind::alignment, "window end precedes start", "window");
    if (!is_aligned(window.start, step) || !is_aligned(window.end, step)) {
        throw Error(ErrorKind::alignment,
                    "window [" + format_iso8601(window.start) + ", " + format_iso8601(window.end) +
                        ") is not aligned to a " + std::to_string(step.count()) + "s step",
                    "window");
    }
}

std::map<Timestamp, std::size_t> per_frame_counts(const std::vector<DetectionRecord>& records) {
    std::map<Timestamp, std::size_t> counts;
    for (const auto& r : records) ++counts[r.timestamp];
    return counts;
}

namespace {

std::size_t interval_count(const TimeWindow& window, Seconds step) {
    return static_cast<std::size_t>((window.end - window.start) / step);
}

}  // namespace

IntervalSeries count_series(const std::vector<DetectionRecord>& records, const TimeWindow& window, Seconds step) {
    check_window(window, step);
    IntervalSeries series;
    series.start = window.start;
    series.step = step;
    series.kind = SeriesKind::count;
    series.values.assign(interval_count(window, step), 0.0);
    for (const auto& [ts, n] : per_frame_counts(records)) {
        if (ts < window.start || ts >= window.end) continue;
        const auto idx = static_cast<std::size_t>((ts - window.start) / step);
        series.values[idx] = std::max(series.values[idx], static_cast<double>(n));
    }
    return series;
}

std::uint64_t Heatmap::total_occupancy() const {
    std::uint64_t total = 0;
    for (auto v : occupied_frames) total += v;
    return total;
}

Heatmap accumulate_heatmap(const std::vector<DetectionRecord>& records, const FrameGeometry& geometry,
                           std::size_t frames) {
    geometry.validate();
    if (frames == 0) throw Error(ErrorKind::validation, "frame count must be positive", "frames");

    Heatmap heatmap;
    heatmap.width = geometry.width;
    heatmap.height = geometry.height;
    heatmap.frames = frames;
    const std::size_t cells = static_cast<std::size_t>(geometry.width) * geometry.height;
    heatmap.occupied_frames.assign(cells, 0);
    if (records.empty()) return heatmap;

    // Frame-stamp grid: a cell is counted once per frame however many masks cover it.
    std::vector<std::uint32_t> last_frame(cells, 0);
    std::map<Timestamp, std::vector<const DetectionRecord*>> by_frame;
    for (const auto& r : records) by_frame[r.timestamp].push_back(&r);
    if (by_frame.size() > frames) {
        throw Error(ErrorKind::validation,
                    std::to_string(by_frame.size()) + " distinct frames exceed the nominal " +
                        std::to_string(frames) + " frames per interval",
                    "frames");
    }

    std::uint32_t stamp = 0;
    for (const auto& [ts, frame_records] : by_frame) {
        ++stamp;
        for (const DetectionRecord* r : frame_records) {
            for (const Point& p : r->mask.polygon) {
                if (p.x < 0.0 || p.x > geometry.width || p.y < 0.0 || p.y > geometry.height) {
                    throw Error(ErrorKind::geometry,
                                "mask at " + format_iso8601(ts) + " does not fit a " +
                                    std::to_string(geometry.width) + "x" + std::to_string(geometry.height) +
                                    " frame",
                                "mask");
                }
            }
            for_each_mask_span(r->mask, geometry.width, geometry.height, [&](int row, int first, int last) {
                const std::size_t base = static_cast<std::size_t>(row) * geometry.width;
                for (int x = first; x <= last; ++x) {
                    const std::size_t c = base + static_cast<std::size_t>(x);
                    if (last_frame[c] != stamp) {
                        last_frame[c] = stamp;
                        ++heatmap.occupied_frames[c];
                    }
                }
            });
        }
    }
    return heatmap;
}

double saturation_value(const Heatmap& heatmap, const FrameGeometry& geometry) {
    if (heatmap.width != geometry.width || heatmap.height != geometry.height) {
        throw Error(ErrorKind::geometry, "heatmap size does not match frame geometry", "geometry");
    }
    // sum(255 * occ / frames) / (w * h * 255) == sum(occ) / (frames * w * h)
    const double denom = static_cast<double>(heatmap.frames) * static_cast<double>(geometry.width) *
                         static_cast<double>(geometry.height);
    return static_cast<double>(heatmap.total_occupancy()) / denom;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<const Segment*> index_segments(const std::vector<Segment>& segments, const TimeWindow& window,
                                           Seconds step) {
    std::vector<const Segment*> by_interval(interval_count(window, step), nullptr);
    for (const auto& seg : segments) {
        if (seg.start < window.start || seg.start >= window.end) continue;
        if (!is_aligned(seg.start, step)) {
            throw Error(ErrorKind::alignment, "segment " + format_iso8601(seg.start) + " is not on the step grid",
                        segment_file_stem(seg.start));
        }
        by_interval[static_cast<std::size_t>((seg.start - window.start) / step)] = &seg;
    }
    return by_interval;
}

}  // namespace

IntervalSeries heatmap_series(const std::vector<Segment>& segments, const TimeWindow& window,
                              const FrameGeometry& geometry, Seconds step, unsigned workers) {
    check_window(window, step);
    geometry.validate();
    const auto by_interval = index_segments(segments, window, step);
    const std::size_t frames = geometry.frames_per(step);

    IntervalSeries series;
    series.start = window.start;
    series.step = step;
    series.kind = SeriesKind::saturation;
    series.values.assign(by_interval.size(), 0.0);
    parallel_for(by_interval.size(), workers, [&](std::size_t i) {
        if (by_interval[i] == nullptr) return;
        try {
            series.values[i] = saturation_value(accumulate_heatmap(by_interval[i]->records, geometry, frames), geometry);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " in segment " + segment_file_stem(by_interval[i]->start),
                        segment_file_stem(by_interval[i]->start) + ".csv");
        }
    });
    for (std::size_t i = 0; i < by_interval.size(); ++i) {
        if (by_interval[i] == nullptr) series.gaps.push_back(i);
    }
    return series;
}

SeriesPair build_series(const std::vector<Segment>& segments, const TimeWindow& window,
                        const FrameGeometry& geometry, Seconds step, unsigned workers) {
    SeriesPair pair;
    pair.saturation = heatmap_series(segments, window, geometry, step, workers);

    std::vector<DetectionRecord> all;
    for (const auto& seg : segments) all.insert(all.end(), seg.records.begin(), seg.records.end());
    pair.count = count_series(all, window, step);
    pair.count.gaps = pair.saturation.gaps;
    return pair;
}

std::string series_to_csv(const IntervalSeries& series) {
    std::string out = "timestamp,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_iso8601(series.time_at(i));
        out += ',';
        out += format_double(series.values[i]);
        out += '\n';
    }
    return out;
}

std::string series_metadata(const IntervalSeries& series, const FrameGeometry* geometry) {
    std::ostringstream out;
    out << "kind=" << to_string(series.kind) << '\n';
    out << "step_seconds=" << series.step.count() << '\n';
    out << "start=" << format_iso8601(series.start) << '\n';
    out << "length=" << series.size() << '\n';
    if (geometry) {
        out << "width=" << geometry->width << '\n';
        out << "height=" << geometry->height << '\n';
        out << "fps=" << format_double(geometry->fps) << '\n';
    }
    out << "gaps=";
    for (std::size_t i = 0; i < series.gaps.size(); ++i) out << (i ? "," : "") << series.gaps[i];
    out << '\n';
    return out.str();
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::validation, "metadata line without '=': " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

IntervalSeries series_from_files(const std::string& csv, const std::string& metadata) {
    IntervalSeries series;
    std::vector<Timestamp> stamps;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "timestamp,value") throw Error(ErrorKind::schema, "series CSV header must be 'timestamp,value'");
            header = false;
            continue;
        }
        ++row;
        const auto comma = line.find(',');
        auto ts = comma == std::string::npos ? std::nullopt : parse_iso8601(line.substr(0, comma));
        double v = 0.0;
        const char* first = comma == std::string::npos ? nullptr : line.data() + comma + 1;
        const char* last = line.data() + line.size();
        if (!ts || first == nullptr || std::from_chars(first, last, v).ptr != last || first == last) {
            throw Error(ErrorKind::validation, "malformed series row " + std::to_string(row), "row " + std::to_string(row));
        }
        stamps.push_back(*ts);
        series.values.push_back(v);
    }

    const auto kv = parse_key_values(metadata);
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto k = get("kind")) series.kind = parse_series_kind(*k);
    if (auto s = get("step_seconds")) {
        series.step = Seconds{std::stoll(*s)};
    } else if (stamps.size() >= 2) {
        series.step = stamps[1] - stamps[0];
    }
    if (auto s = get("start")) {
        auto ts = parse_iso8601(*s);
        if (!ts) throw Error(ErrorKind::validation, "bad start in series metadata", "start");
        series.start = *ts;
    } else if (!stamps.empty()) {
        series.start = stamps.front();
    }
    if (auto g = get("gaps"); g && !g->empty()) {
        std::istringstream gs(*g);
        std::string tok;
        while (std::getline(gs, tok, ',')) series.gaps.push_back(std::stoull(tok));
    }
    if (auto l = get("length"); l && std::stoull(*l) != series.size()) {
        throw Error(ErrorKind::validation, "series length does not match metadata", "length");
    }
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        if (stamps[i] != series.time_at(i)) {
            throw Error(ErrorKind::validation, "series row " + std::to_string(i + 1) + " breaks the regular grid",
                        "row " + std::to_string(i + 1));
        }
    }
    return series;
}

IntervalSeries load_series(const fs::path& csv_path) {
    fs::path meta = csv_path;
    meta.replace_extension(".meta");
    const std::string metadata = fs::exists(meta) ? read_text_file(meta) : std::string{};
    return series_from_files(read_text_file(csv_path), metadata);
}

void save_series(const IntervalSeries& series, const fs::path& csv_path, const FrameGeometry* geometry) {
    fs::path meta = csv_path;
    meta.replace_extension(".meta");
    write_text_file(csv_path, series_to_csv(series));
    write_text_file(meta, series_metadata(series, geometry));
}

}  // namespace crowdflow
