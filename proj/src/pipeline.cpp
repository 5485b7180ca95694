#include "crowdflow/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "crowdflow/augment.hpp"
#include "crowdflow/error.hpp"
#include "crowdflow/random.hpp"

namespace crowdflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorKind::validation, where + " must be a JSON object", where);
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw Error(ErrorKind::validation, "unknown config key '" + where + "." + key + "'", key);
        }
    }
}

void read_stl(const json& j, StlConfig& stl) {
    check_keys(j, {"period", "seasonal_window", "trend_window", "lowpass_window", "inner_iterations", "outer_iterations",
                   "loess_degree"},
               "stl");
    stl.period = j.value("period", stl.period);
    stl.seasonal_window = j.value("seasonal_window", stl.seasonal_window);
    stl.trend_window = j.value("trend_window", stl.trend_window);
    stl.lowpass_window = j.value("lowpass_window", stl.lowpass_window);
    stl.inner_iterations = j.value("inner_iterations", stl.inner_iterations);
    stl.outer_iterations = j.value("outer_iterations", stl.outer_iterations);
    stl.loess_degree = j.value("loess_degree", stl.loess_degree);
}

void read_esd(const json& j, EsdConfig& esd) {
    check_keys(j, {"alpha", "max_anomalies", "two_sided", "robust", "rank_by_magnitude"}, "esd");
    esd.alpha = j.value("alpha", esd.alpha);
    esd.max_anomalies = j.value("max_anomalies", esd.max_anomalies);
    esd.two_sided = j.value("two_sided", esd.two_sided);
    esd.robust = j.value("robust", esd.robust);
    esd.rank_by_magnitude = j.value("rank_by_magnitude", esd.rank_by_magnitude);
}

void read_series_settings(const json& j, SeriesSettings& s, const std::string& where) {
    check_keys(j, {"stl", "esd"}, where);
    if (j.contains("stl")) read_stl(j.at("stl"), s.stl);
    if (j.contains("esd")) read_esd(j.at("esd"), s.esd);
}

}  // namespace

void PipelineConfig::validate() const {
    geometry.validate();
    if (step.count() <= 0) throw Error(ErrorKind::validation, "step must be positive", "step_seconds");
    if (allowed_classes.empty()) throw Error(ErrorKind::validation, "at least one class must be allowed", "classes");
    if (augment.enabled) {
        if (augment.weeks < 1) throw Error(ErrorKind::validation, "augment.weeks must be >= 1", "weeks");
        if (!(augment.fraction > 0.0 && augment.fraction <= 1.0)) {
            throw Error(ErrorKind::validation, "augment.fraction must lie in (0, 1]", "fraction");
        }
        if (step != kQuarterHour) {
            throw Error(ErrorKind::configuration, "augmentation requires a 900 s step", "step_seconds");
        }
    }
    for (const auto* s : {&count, &saturation}) {
        s->stl.resolved().validate();
        if (!(s->esd.alpha > 0.0 && s->esd.alpha < 1.0)) throw Error(ErrorKind::validation, "esd.alpha must lie in (0, 1)", "alpha");
    }
    if (window) check_window(*window, step);
    if (input_dir.empty() || !fs::is_directory(input_dir)) {
        throw Error(ErrorKind::io, "input directory does not exist: " + input_dir.string(), input_dir.string());
    }
    if (output_dir.empty()) throw Error(ErrorKind::validation, "output directory is required", "output_dir");
}

PipelineConfig pipeline_config_from_json(const json& doc) {
    try {
        check_keys(doc, {"input_dir", "output_dir", "geometry", "step_seconds", "classes", "augment", "stl", "esd",
                         "count", "saturation", "window", "workers", "skip_bad_rows"},
                   "config");
        PipelineConfig cfg;
        if (doc.contains("input_dir")) cfg.input_dir = doc.at("input_dir").get<std::string>();
        if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("geometry")) {
            const auto& g = doc.at("geometry");
            check_keys(g, {"width", "height", "fps"}, "geometry");
            cfg.geometry.width = g.value("width", cfg.geometry.width);
            cfg.geometry.height = g.value("height", cfg.geometry.height);
            cfg.geometry.fps = g.value("fps", cfg.geometry.fps);
        }
        cfg.step = Seconds{doc.value("step_seconds", cfg.step.count())};
        if (doc.contains("classes")) cfg.allowed_classes = doc.at("classes").get<std::set<std::string>>();
        if (doc.contains("augment")) {
            const auto& a = doc.at("augment");
            check_keys(a, {"enabled", "weeks", "seed", "fraction"}, "augment");
            cfg.augment.enabled = a.value("enabled", cfg.augment.enabled);
            cfg.augment.weeks = a.value("weeks", cfg.augment.weeks);
            cfg.augment.seed = a.value("seed", cfg.augment.seed);
            cfg.augment.fraction = a.value("fraction", cfg.augment.fraction);
        }
        // Top-level stl/esd apply to both series; per-series blocks override them.
        if (doc.contains("stl")) {
            read_stl(doc.at("stl"), cfg.count.stl);
            read_stl(doc.at("stl"), cfg.saturation.stl);
        }
        if (doc.contains("esd")) {
            read_esd(doc.at("esd"), cfg.count.esd);
            read_esd(doc.at("esd"), cfg.saturation.esd);
        }
        if (doc.contains("count")) read_series_settings(doc.at("count"), cfg.count, "count");
        if (doc.contains("saturation")) read_series_settings(doc.at("saturation"), cfg.saturation, "saturation");
        if (doc.contains("window")) {
            const auto& w = doc.at("window");
            check_keys(w, {"start", "end"}, "window");
            auto s = parse_iso8601(w.at("start").get<std::string>());
            auto e = parse_iso8601(w.at("end").get<std::string>());
            if (!s || !e) throw Error(ErrorKind::validation, "window bounds must be ISO-8601 timestamps", "window");
            cfg.window = TimeWindow{*s, *e};
        }
        cfg.workers = doc.value("workers", cfg.workers);
        cfg.skip_bad_rows = doc.value("skip_bad_rows", cfg.skip_bad_rows);
        return cfg;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::validation, std::string("malformed config: ") + e.what(), "config");
    }
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    const std::string text = read_text_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::validation, "config is not valid JSON: " + std::string(e.what()), path.string());
    }
    return pipeline_config_from_json(doc);
}

namespace {

template <typename Fn>
void run_indexed(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) {
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

std::vector<Segment> parse_segments(const std::vector<SegmentFile>& files, const std::vector<std::string>& contents,
                                    const FrameGeometry& geometry, const std::set<std::string>& allowed_classes,
                                    bool skip_bad_rows, unsigned workers) {
    std::vector<Segment> segments(files.size());
    run_indexed(files.size(), workers, [&](std::size_t i) {
        ParseOptions options;
        options.skip_bad_rows = skip_bad_rows;
        if (skip_bad_rows) {
            const std::string name = files[i].path.filename().string();
            options.on_skip = [name](const RowIssue& issue) {
                std::fprintf(stderr, "warning: %s: skipped row %zu: %s\n", name.c_str(), issue.row, issue.message.c_str());
            };
        }
        try {
            segments[i].start = files[i].start;
            segments[i].records = filter_by_class(parse_segment_csv(contents[i], geometry, options), allowed_classes);
        } catch (const Error& e) {
            throw e.with_stage("ingest", files[i].path.string());
        }
    });
    return segments;
}

}  // namespace

std::vector<Segment> load_segments(const fs::path& dir, const FrameGeometry& geometry,
                                   const std::set<std::string>& allowed_classes, bool skip_bad_rows, unsigned workers) {
    const auto files = list_segment_files(dir);
    std::vector<std::string> contents(files.size());
    run_indexed(files.size(), workers, [&](std::size_t i) { contents[i] = read_text_file(files[i].path); });
    return parse_segments(files, contents, geometry, allowed_classes, skip_bad_rows, workers);
}

namespace {

/// Stage fingerprints and per-file content hashes persisted between runs.
class Manifest {
public:
    explicit Manifest(fs::path dir) : dir_(std::move(dir)) {
        const fs::path path = dir_ / "manifest.txt";
        if (!fs::exists(path)) return;
        std::istringstream in(read_text_file(path));
        std::string kind, stage, a, b;
        while (in >> kind) {
            if (kind == "stage" && in >> stage >> a) {
                stages_[stage].fingerprint = a;
            } else if (kind == "file" && in >> stage >> a >> b) {
                stages_[stage].files[a] = b;
            } else {
                stages_.clear();  // unreadable manifest: trust nothing
                return;
            }
        }
    }

    bool reusable(const std::string& stage, const std::string& fingerprint, const std::vector<std::string>& files) const {
        auto it = stages_.find(stage);
        if (it == stages_.end() || it->second.fingerprint != fingerprint) return false;
        for (const auto& f : files) {
            auto fh = it->second.files.find(f);
            const fs::path path = dir_ / f;
            if (fh == it->second.files.end() || !fs::exists(path)) return false;
            if (hex(fnv1a(read_text_file(path))) != fh->second) return false;
        }
        return true;
    }

    void record(const std::string& stage, const std::string& fingerprint, const std::vector<std::string>& files) {
        Entry e;
        e.fingerprint = fingerprint;
        for (const auto& f : files) e.files[f] = hex(fnv1a(read_text_file(dir_ / f)));
        stages_[stage] = std::move(e);
        save();
    }

    void forget(const std::string& stage) {
        stages_.erase(stage);
        save();
    }

private:
    struct Entry {
        std::string fingerprint;
        std::map<std::string, std::string> files;
    };

    void save() const {
        std::string out;
        for (const auto& [stage, e] : stages_) {
            out += "stage " + stage + " " + e.fingerprint + "\n";
            for (const auto& [f, h] : e.files) out += "file " + stage + " " + f + " " + h + "\n";
        }
        write_text_file(dir_ / "manifest.txt", out);
    }

    fs::path dir_;
    std::map<std::string, Entry> stages_;
};

std::string fingerprint(std::initializer_list<std::string> parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : parts) {
        h = fnv1a(p, h);
        h = fnv1a("\x1f", h);
    }
    return hex(h);
}

std::string stl_key(const StlConfig& c) {
    const StlConfig r = c.resolved();
    std::ostringstream s;
    s << r.period << ',' << r.seasonal_window << ',' << r.trend_window << ',' << r.lowpass_window << ','
      << r.inner_iterations << ',' << r.outer_iterations << ',' << r.loess_degree;
    return s.str();
}

const char* const kReportFiles[] = {"count_report.json", "saturation_report.json"};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    std::string stage = "config";
    PipelineResult result;
    const fs::path out = config.output_dir;
    try {
        config.validate();
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec || !fs::is_directory(out)) throw Error(ErrorKind::io, "cannot create output directory " + out.string(), out.string());
        fs::remove(out / "INCOMPLETE", ec);
        Manifest manifest(out);

        // ---- series -------------------------------------------------------------
        stage = "series";
        const auto files = list_segment_files(config.input_dir);
        if (files.empty()) {
            throw Error(ErrorKind::insufficient_data, "no segment files (YYYYMMDD_HHMM.csv) in " + config.input_dir.string(),
                        config.input_dir.string());
        }
        std::vector<std::string> contents(files.size());
        run_indexed(files.size(), config.workers, [&](std::size_t i) { contents[i] = read_text_file(files[i].path); });

        std::uint64_t input_hash = 0xcbf29ce484222325ULL;
        for (std::size_t i = 0; i < files.size(); ++i) {
            input_hash = fnv1a(files[i].path.filename().string(), input_hash);
            input_hash = fnv1a(contents[i], input_hash);
        }
        std::string classes;
        for (const auto& c : config.allowed_classes) classes += c + ";";
        const TimeWindow window = config.window.value_or(TimeWindow{files.front().start, files.back().start + config.step});
        const std::string series_fp =
            fingerprint({hex(input_hash), std::to_string(config.geometry.width), std::to_string(config.geometry.height),
                         format_double(config.geometry.fps), std::to_string(config.step.count()), classes,
                         config.skip_bad_rows ? "skip" : "strict", format_iso8601(window.start), format_iso8601(window.end)});
        const std::vector<std::string> series_files{"count_series.csv", "count_series.meta", "saturation_series.csv",
                                                    "saturation_series.meta"};
        if (manifest.reusable("series", series_fp, series_files)) {
            result.count.observed = load_series(out / "count_series.csv");
            result.saturation.observed = load_series(out / "saturation_series.csv");
        } else {
            manifest.forget("series");
            result.executed_stages.push_back("ingest");
            const auto segments = parse_segments(files, contents, config.geometry, config.allowed_classes,
                                                 config.skip_bad_rows, config.workers);
            result.executed_stages.push_back("series");
            auto pair = build_series(segments, window, config.geometry, config.step, config.workers);
            result.count.observed = std::move(pair.count);
            result.saturation.observed = std::move(pair.saturation);
            save_series(result.count.observed, out / "count_series.csv", &config.geometry);
            save_series(result.saturation.observed, out / "saturation_series.csv", &config.geometry);
            manifest.record("series", series_fp, series_files);
        }
        contents.clear();
        contents.shrink_to_fit();

        // ---- augment ------------------------------------------------------------
        stage = "augment";
        const auto& aug = config.augment;
        const std::string augment_fp =
            fingerprint({series_fp, aug.enabled ? "on" : "off", std::to_string(aug.weeks), std::to_string(aug.seed),
                         format_double(aug.fraction)});
        const std::size_t synthetic = aug.enabled ? GroupKey::kCount * static_cast<std::size_t>(aug.weeks) : 0;
        if (!aug.enabled) {
            result.count.analysed = result.count.observed;
            result.saturation.analysed = result.saturation.observed;
        } else {
            const std::vector<std::string> augment_files{"count_stats.csv", "count_augmented.csv", "count_augmented.meta",
                                                         "saturation_stats.csv", "saturation_augmented.csv",
                                                         "saturation_augmented.meta"};
            if (manifest.reusable("augment", augment_fp, augment_files)) {
                result.count.analysed = load_series(out / "count_augmented.csv");
                result.saturation.analysed = load_series(out / "saturation_augmented.csv");
            } else {
                manifest.forget("augment");
                result.executed_stages.push_back("augment");
                const Rng root(aug.seed);
                std::uint64_t stream = 0;
                for (SeriesOutcome* s : {&result.count, &result.saturation}) {
                    Rng partition_rng = root.split(stream++);
                    Rng sample_rng = root.split(stream++);
                    const auto stats = grouped_stats(partition_for_stats(s->observed, aug.fraction, partition_rng));
                    s->analysed = extend_backward(s->observed, stats, aug.weeks, default_family(s->observed.kind), sample_rng);
                    const std::string kind = to_string(s->observed.kind);
                    write_text_file(out / (kind + "_stats.csv"), grouped_stats_to_csv(stats));
                    save_series(s->analysed, out / (kind + "_augmented.csv"), &config.geometry);
                }
                manifest.record("augment", augment_fp, augment_files);
            }
        }

        // ---- decompose ----------------------------------------------------------
        stage = "decompose";
        const std::string decompose_fp =
            fingerprint({augment_fp, stl_key(config.count.stl), stl_key(config.saturation.stl)});
        const std::vector<std::string> decompose_files{"count_decomposition.csv", "saturation_decomposition.csv"};
        if (manifest.reusable("decompose", decompose_fp, decompose_files)) {
            for (SeriesOutcome* s : {&result.count, &result.saturation}) {
                const auto kind = s->analysed.kind;
                s->decomposition =
                    decomposition_from_csv(read_text_file(out / (std::string(to_string(kind)) + "_decomposition.csv")), kind);
            }
        } else {
            manifest.forget("decompose");
            result.executed_stages.push_back("decompose");
            result.count.decomposition = stl_decompose(result.count.analysed, config.count.stl);
            result.saturation.decomposition = stl_decompose(result.saturation.analysed, config.saturation.stl);
            for (const SeriesOutcome* s : {&result.count, &result.saturation}) {
                write_text_file(out / (std::string(to_string(s->analysed.kind)) + "_decomposition.csv"),
                                decomposition_to_csv(s->decomposition));
            }
            manifest.record("decompose", decompose_fp, decompose_files);
        }

        // ---- detect -------------------------------------------------------------
        stage = "detect";
        result.executed_stages.push_back("detect");
        std::optional<AugmentEcho> echo_count, echo_saturation;
        if (aug.enabled) {
            echo_count = AugmentEcho{aug.weeks, aug.seed, aug.fraction, Family::gumbel};
            echo_saturation = AugmentEcho{aug.weeks, aug.seed, aug.fraction, Family::laplace};
        }
        result.count.report =
            detect_anomalies(result.count.decomposition, config.count.stl, config.count.esd, synthetic, echo_count);
        result.saturation.report = detect_anomalies(result.saturation.decomposition, config.saturation.stl,
                                                    config.saturation.esd, synthetic, echo_saturation);

        // ---- plot-data ----------------------------------------------------------
        stage = "plot-data";
        result.executed_stages.push_back("plot-data");
        for (const SeriesOutcome* s : {&result.count, &result.saturation}) {
            emit_plot_data(s->report, s->decomposition, s->analysed, out / "plot");
        }
        write_text_file(out / kReportFiles[0], report_to_string(result.count.report));
        write_text_file(out / kReportFiles[1], report_to_string(result.saturation.report));
        return result;
    } catch (const Error& e) {
        std::error_code ec;
        for (const char* f : kReportFiles) fs::remove(out / f, ec);
        const Error tagged = e.stage().empty() ? e.with_stage(stage) : e;
        if (fs::is_directory(out, ec)) {
            try {
                write_text_file(out / "INCOMPLETE", std::string("stage=") + tagged.stage() + "\nerror=" + tagged.what() + "\n");
            } catch (const Error&) {
            }
        }
        throw tagged;
    }
}

}  // namespace crowdflow
