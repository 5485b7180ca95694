#include "crowdflow/synth.hpp"

#include <algorithm>
#include <cmath>

#include "crowdflow/error.hpp"
#include "crowdflow/random.hpp"

namespace crowdflow {

namespace fs = std::filesystem;

void SyntheticScenario::validate() const {
    geometry.validate();
    if (weeks < 1) throw Error(ErrorKind::validation, "scenario needs at least one week", "weeks");
    if (!is_aligned(start, kQuarterHour)) throw Error(ErrorKind::validation, "scenario start must be on a quarter hour", "start");
    if (tile < 3 || tile > geometry.width || tile > geometry.height) {
        throw Error(ErrorKind::validation, "tile must be at least 3 px and fit in the frame", "tile");
    }
    if (geometry.frames_per(kQuarterHour) > static_cast<std::size_t>(kQuarterHour.count())) {
        throw Error(ErrorKind::validation, "at most one frame per second is representable", "fps");
    }
    for (double v : daily_profile) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::validation, "daily profile must be >= 0", "daily_profile");
    }
    const Timestamp end = interval_start(intervals());
    for (const auto& p : planted_plateaus) {
        if (p.start < start || p.end > end || !(p.start < p.end) || !(p.level_multiplier >= 0.0)) {
            throw Error(ErrorKind::validation, "plateau outside the generated horizon", "planted_plateaus");
        }
    }
    for (const auto& s : planted_spikes) {
        if (s.timestamp < start || s.timestamp >= end) {
            throw Error(ErrorKind::validation, "spike outside the generated horizon", "planted_spikes");
        }
    }
}

namespace {

double plateau_multiplier(const SyntheticScenario& sc, Timestamp t) {
    double m = 1.0;
    for (const auto& p : sc.planted_plateaus) {
        if (t >= p.start && t < p.end) m *= p.level_multiplier;
    }
    return m;
}

std::uint64_t spike_extra(const SyntheticScenario& sc, Timestamp t) {
    std::uint64_t extra = 0;
    for (const auto& s : sc.planted_spikes) {
        if (s.timestamp >= t && s.timestamp < t + kQuarterHour) extra += s.magnitude;
    }
    return extra;
}

std::size_t slot_of(Timestamp t) { return static_cast<std::size_t>(hour_of_day(t) * 4 + minute_of_hour(t) / 15); }

struct TileLayout {
    int cols = 0;
    int rows = 0;
    int tile = 0;

    std::uint64_t capacity() const { return static_cast<std::uint64_t>(cols) * rows; }

    void append_row(std::string& out, const std::string& ts, std::uint64_t slot, const char* cls, int cls_id,
                    double confidence) const {
        slot %= capacity();
        const int col = static_cast<int>(slot % static_cast<std::uint64_t>(cols));
        const int row = static_cast<int>(slot / static_cast<std::uint64_t>(cols));
        const int x0 = col * tile + 1, x1 = (col + 1) * tile - 1;
        const int y0 = row * tile + 1, y1 = (row + 1) * tile - 1;
        const std::string sx0 = std::to_string(x0), sx1 = std::to_string(x1);
        const std::string sy0 = std::to_string(y0), sy1 = std::to_string(y1);
        out += ts;
        out += ',' + std::to_string(cls_id) + ',' + cls + ',' + format_double(confidence) + ',';
        out += sx0 + ',' + sy0 + ',' + sx1 + ',' + sy1 + ',';
        out += "\"[(" + sx0 + ',' + sy0 + "),(" + sx1 + ',' + sy0 + "),(" + sx1 + ',' + sy1 + "),(" + sx0 + ',' + sy1 +
               ")]\"\n";
    }
};

}  // namespace

std::vector<std::uint64_t> intended_counts(const SyntheticScenario& sc) {
    std::vector<std::uint64_t> counts(sc.intervals());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const Timestamp t = sc.interval_start(i);
        const double mean = sc.daily_profile[slot_of(t)] * plateau_multiplier(sc, t);
        counts[i] = static_cast<std::uint64_t>(std::llround(mean)) + spike_extra(sc, t);
    }
    return counts;
}

FixtureSummary generate_fixture(const SyntheticScenario& sc, const fs::path& output_dir) {
    sc.validate();
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec || !fs::is_directory(output_dir)) {
        throw Error(ErrorKind::io, "cannot create output directory " + output_dir.string(), output_dir.string());
    }

    const TileLayout layout{sc.geometry.width / sc.tile, sc.geometry.height / sc.tile, sc.tile};
    const std::size_t frames = sc.geometry.frames_per(kQuarterHour);
    const std::int64_t frame_gap = kQuarterHour.count() / static_cast<std::int64_t>(frames);

    Rng rng(sc.noise_seed);
    FixtureSummary summary;
    summary.counts.resize(sc.intervals());
    std::string content;
    for (std::size_t i = 0; i < sc.intervals(); ++i) {
        const Timestamp t = sc.interval_start(i);
        const double mean = sc.daily_profile[slot_of(t)] * plateau_multiplier(sc, t);
        const std::uint64_t baseline = sc.jitter ? rng.poisson(mean) : static_cast<std::uint64_t>(std::llround(mean));
        const std::uint64_t count = baseline + spike_extra(sc, t);
        const std::size_t peak_frame = sc.jitter ? static_cast<std::size_t>(rng.uniform_index(frames)) : 0;
        summary.counts[i] = count;

        content.assign(kSegmentCsvHeader);
        content += '\n';
        for (std::size_t f = 0; f < frames; ++f) {
            std::uint64_t in_frame = count;
            if (sc.jitter && f != peak_frame && count > 0) in_frame -= rng.uniform_index(2);
            const std::string ts = format_iso8601(t + Seconds{static_cast<std::int64_t>(f) * frame_gap});
            for (std::uint64_t j = 0; j < in_frame; ++j) {
                layout.append_row(content, ts, j, "person", 0, 0.5 + 0.25 * static_cast<double>((i + j) % 3));
                ++summary.rows;
            }
            for (std::uint64_t k = 0; k < sc.distractors_per_frame; ++k) {
                layout.append_row(content, ts, layout.capacity() - 1 - (k % layout.capacity()), "car", 2, 0.9);
                ++summary.rows;
            }
        }
        write_text_file(output_dir / (segment_file_stem(t) + ".csv"), content);
        ++summary.files;
    }
    return summary;
}

nlohmann::json fixture_pipeline_config(const SyntheticScenario& sc, const fs::path& input_dir) {
    return {{"input_dir", input_dir.string()},
            {"geometry", {{"width", sc.geometry.width}, {"height", sc.geometry.height}, {"fps", sc.geometry.fps}}},
            {"step_seconds", kQuarterHour.count()},
            {"classes", {"person"}}};
}

namespace {

Timestamp json_time(const nlohmann::json& j, const char* field) {
    auto ts = parse_iso8601(j.get<std::string>());
    if (!ts) throw Error(ErrorKind::validation, std::string("bad timestamp in scenario field ") + field, field);
    return *ts;
}

}  // namespace

SyntheticScenario scenario_from_json(const nlohmann::json& doc) {
    try {
        SyntheticScenario sc = reference_scenario(doc.value("seed", std::uint64_t{0}));
        if (doc.contains("start")) sc.start = json_time(doc.at("start"), "start");
        sc.weeks = doc.value("weeks", sc.weeks);
        if (doc.contains("daily_profile")) {
            const auto& p = doc.at("daily_profile");
            if (p.is_number()) {
                sc.daily_profile.fill(p.get<double>());
            } else {
                if (p.size() != 96) throw Error(ErrorKind::validation, "daily_profile needs 96 values", "daily_profile");
                for (std::size_t i = 0; i < 96; ++i) sc.daily_profile[i] = p.at(i).get<double>();
            }
        }
        if (doc.contains("plateaus")) {
            sc.planted_plateaus.clear();
            for (const auto& p : doc.at("plateaus")) {
                sc.planted_plateaus.push_back(
                    {json_time(p.at("start"), "plateaus"), json_time(p.at("end"), "plateaus"), p.at("multiplier").get<double>()});
            }
        }
        if (doc.contains("spikes")) {
            sc.planted_spikes.clear();
            for (const auto& s : doc.at("spikes")) {
                sc.planted_spikes.push_back({json_time(s.at("timestamp"), "spikes"), s.at("magnitude").get<std::uint64_t>()});
            }
        }
        sc.jitter = doc.value("jitter", sc.jitter);
        if (doc.contains("geometry")) {
            const auto& g = doc.at("geometry");
            sc.geometry.width = g.value("width", sc.geometry.width);
            sc.geometry.height = g.value("height", sc.geometry.height);
            sc.geometry.fps = g.value("fps", sc.geometry.fps);
        }
        sc.tile = doc.value("tile", sc.tile);
        sc.distractors_per_frame = doc.value("distractors_per_frame", sc.distractors_per_frame);
        sc.validate();
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::validation, std::string("malformed scenario: ") + e.what(), "scenario");
    }
}

SyntheticScenario reference_scenario(std::uint64_t seed) {
    using namespace std::chrono;
    SyntheticScenario sc;
    sc.start = sys_days{year{2023} / July / 24};  // a Monday; 12 weeks end on 2023-10-16
    sc.weeks = 12;
    for (std::size_t s = 0; s < 96; ++s) {
        const double hour = static_cast<double>(s) / 4.0;
        const double z = (hour - 13.0) / 3.5;
        sc.daily_profile[s] = 0.5 + 5.5 * std::exp(-z * z);
    }
    // Two-day festive plateau (Sat 7 - Mon 9 October) at five times the usual level.
    sc.planted_plateaus.push_back({sys_days{year{2023} / October / 7}, sys_days{year{2023} / October / 9}, 5.0});
    // Isolated weekday-morning spike at ten times the usual level, plus one inside the plateau.
    const Timestamp spike = sys_days{year{2023} / October / 11} + hours{10} + minutes{15};
    const Timestamp masked = sys_days{year{2023} / October / 8} + hours{11};
    sc.planted_spikes.push_back({spike, static_cast<std::uint64_t>(std::llround(9.0 * sc.daily_profile[41]))});
    sc.planted_spikes.push_back({masked, static_cast<std::uint64_t>(std::llround(9.0 * sc.daily_profile[44]))});
    sc.noise_seed = seed;
    return sc;
}

}  // namespace crowdflow
