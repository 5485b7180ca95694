// Command-line front end: one subcommand per pipeline stage plus `run`, `synth` and `plot-data`.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "crowdflow/augment.hpp"
#include "crowdflow/error.hpp"
#include "crowdflow/pipeline.hpp"
#include "crowdflow/random.hpp"
#include "crowdflow/report.hpp"
#include "crowdflow/synth.hpp"

namespace fs = std::filesystem;
using namespace crowdflow;

namespace {

struct Options {
    std::string config;
    std::string input;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<int> weeks;
    std::optional<double> alpha;
    std::optional<std::size_t> max_anoms;
    std::optional<double> fraction;
    std::string classes;
    std::string kind;
    std::string report;
    std::string decomposition;
    std::size_t synthetic_points = 0;
    unsigned workers = 0;
    bool skip_bad_rows = false;
    bool no_augment = false;
};

std::set<std::string> split_classes(const std::string& text) {
    std::set<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    if (out.empty()) throw Error(ErrorKind::validation, "--classes needs at least one class name", "classes");
    return out;
}

/// Config file (if any) with the command-line overrides applied.
PipelineConfig effective_config(const Options& o) {
    PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_pipeline_config(o.config);
    if (!o.input.empty()) cfg.input_dir = o.input;
    if (!o.output.empty()) cfg.output_dir = o.output;
    if (o.seed) cfg.augment.seed = *o.seed;
    if (o.weeks) cfg.augment.weeks = *o.weeks;
    if (o.fraction) cfg.augment.fraction = *o.fraction;
    if (o.no_augment) cfg.augment.enabled = false;
    for (auto* s : {&cfg.count, &cfg.saturation}) {
        if (o.alpha) s->esd.alpha = *o.alpha;
        if (o.max_anoms) s->esd.max_anomalies = *o.max_anoms;
    }
    if (!o.classes.empty()) cfg.allowed_classes = split_classes(o.classes);
    if (o.workers > 0) cfg.workers = o.workers;
    if (o.skip_bad_rows) cfg.skip_bad_rows = true;
    return cfg;
}

SeriesKind kind_of(const Options& o, const fs::path& file) {
    if (!o.kind.empty()) return parse_series_kind(o.kind);
    const std::string name = file.filename().string();
    if (name.rfind("count", 0) == 0) return SeriesKind::count;
    if (name.rfind("saturation", 0) == 0) return SeriesKind::saturation;
    throw Error(ErrorKind::validation, "cannot infer series kind from '" + name + "'; pass --kind", "kind");
}

const SeriesSettings& settings_for(const PipelineConfig& cfg, SeriesKind kind) {
    return kind == SeriesKind::count ? cfg.count : cfg.saturation;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create directory " + dir.string(), dir.string());
}

int cmd_ingest(const Options& o) {
    const PipelineConfig cfg = effective_config(o);
    ParseOptions options;
    options.skip_bad_rows = cfg.skip_bad_rows;
    options.on_skip = [](const RowIssue& issue) {
        std::fprintf(stderr, "warning: skipped row %zu (%s): %s\n", issue.row, issue.field.c_str(), issue.message.c_str());
    };
    auto records = parse_segment_csv(read_text_file(o.input), cfg.geometry, options);
    records = filter_by_class(records, cfg.allowed_classes);
    if (!o.output.empty()) write_text_file(o.output, serialize_segment_csv(records));
    std::printf("%zu records\n", records.size());
    return 0;
}

int cmd_series(const Options& o) {
    const PipelineConfig cfg = effective_config(o);
    const auto files = list_segment_files(cfg.input_dir);
    if (files.empty()) {
        throw Error(ErrorKind::insufficient_data, "no segment files in " + cfg.input_dir.string(), cfg.input_dir.string());
    }
    const auto segments = load_segments(cfg.input_dir, cfg.geometry, cfg.allowed_classes, cfg.skip_bad_rows, cfg.workers);
    const TimeWindow window = cfg.window.value_or(TimeWindow{files.front().start, files.back().start + cfg.step});
    const auto pair = build_series(segments, window, cfg.geometry, cfg.step, cfg.workers);
    ensure_dir(cfg.output_dir);
    save_series(pair.count, cfg.output_dir / "count_series.csv", &cfg.geometry);
    save_series(pair.saturation, cfg.output_dir / "saturation_series.csv", &cfg.geometry);
    std::printf("%zu intervals, %zu gaps\n", pair.count.size(), pair.count.gaps.size());
    return 0;
}

int cmd_augment(const Options& o) {
    const PipelineConfig cfg = effective_config(o);
    const IntervalSeries series = load_series(o.input);
    // Same streams as the full pipeline: count uses 0/1, saturation 2/3.
    const Rng root(cfg.augment.seed);
    const std::uint64_t stream = series.kind == SeriesKind::count ? 0 : 2;
    Rng partition_rng = root.split(stream);
    Rng sample_rng = root.split(stream + 1);
    const auto stats = grouped_stats(partition_for_stats(series, cfg.augment.fraction, partition_rng));
    const auto extended = extend_backward(series, stats, cfg.augment.weeks, default_family(series.kind), sample_rng);
    ensure_dir(cfg.output_dir);
    const std::string kind = to_string(series.kind);
    write_text_file(cfg.output_dir / (kind + "_stats.csv"), grouped_stats_to_csv(stats));
    save_series(extended, cfg.output_dir / (kind + "_augmented.csv"), &cfg.geometry);
    std::printf("%zu points (%zu synthetic)\n", extended.size(), extended.size() - series.size());
    return 0;
}

int cmd_decompose(const Options& o) {
    const PipelineConfig cfg = effective_config(o);
    const IntervalSeries series = load_series(o.input);
    const auto decomposition = stl_decompose(series, settings_for(cfg, series.kind).stl);
    ensure_dir(cfg.output_dir);
    write_text_file(cfg.output_dir / (std::string(to_string(series.kind)) + "_decomposition.csv"),
                    decomposition_to_csv(decomposition));
    return 0;
}

int cmd_detect(const Options& o) {
    const PipelineConfig cfg = effective_config(o);
    const SeriesKind kind = kind_of(o, o.input);
    const auto decomposition = decomposition_from_csv(read_text_file(o.input), kind);
    const auto& settings = settings_for(cfg, kind);
    const auto report = detect_anomalies(decomposition, settings.stl, settings.esd, o.synthetic_points, std::nullopt);
    const std::string text = report_to_string(report);
    if (o.output.empty()) {
        std::cout << text;
    } else {
        ensure_dir(cfg.output_dir);
        write_text_file(cfg.output_dir / (std::string(to_string(kind)) + "_report.json"), text);
    }
    return 0;
}

int cmd_run(const Options& o) {
    const PipelineConfig cfg = effective_config(o);
    const auto result = run_pipeline(cfg);
    std::string stages;
    for (const auto& s : result.executed_stages) stages += (stages.empty() ? "" : ",") + s;
    std::printf("count: %zu collective, %zu points\n", result.count.report.collective.size(),
                result.count.report.points.size());
    std::printf("saturation: %zu collective, %zu points\n", result.saturation.report.collective.size(),
                result.saturation.report.points.size());
    std::printf("stages run: %s\n", stages.c_str());
    return 0;
}

int cmd_synth(const Options& o) {
    SyntheticScenario sc = reference_scenario(*o.seed);
    if (!o.config.empty()) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(o.config));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::validation, std::string("scenario is not valid JSON: ") + e.what(), o.config);
        }
        doc["seed"] = *o.seed;
        sc = scenario_from_json(doc);
    }
    if (o.weeks) sc.weeks = *o.weeks;
    const auto summary = generate_fixture(sc, o.output);
    write_text_file(fs::path(o.output) / "pipeline.json", fixture_pipeline_config(sc, fs::absolute(o.output)).dump(2) + "\n");
    std::printf("%zu files, %zu rows\n", summary.files, summary.rows);
    return 0;
}

int cmd_plot(const Options& o) {
    const AnomalyReport report = [&] {
        try {
            return report_from_json(nlohmann::json::parse(read_text_file(o.report)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::validation, std::string("report is not valid JSON: ") + e.what(), o.report);
        }
    }();
    const auto decomposition = decomposition_from_csv(read_text_file(o.decomposition), report.kind);
    const IntervalSeries series = load_series(o.input);
    emit_plot_data(report, decomposition, series, o.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crowd-flow anomaly detection over webcam detection logs"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON pipeline config")->check(CLI::ExistingFile);
        sub->add_option("--classes", o.classes, "Comma-separated class names to keep (default: person)");
        sub->add_option("--workers", o.workers, "Worker threads");
        sub->add_option("--alpha", o.alpha, "ESD significance level");
        sub->add_option("--max-anoms", o.max_anoms, "ESD k_max (0 = 5% of the series)");
        sub->add_flag("--skip-bad-rows", o.skip_bad_rows, "Drop malformed rows with a warning instead of failing");
    };

    auto* ingest = app.add_subcommand("ingest", "Validate and class-filter one segment CSV");
    ingest->add_option("--input", o.input, "Segment CSV")->required();
    ingest->add_option("--output", o.output, "Normalized CSV to write");
    common(ingest);

    auto* series = app.add_subcommand("series", "Build count and saturation series from a segment directory");
    series->add_option("--input", o.input, "Directory of YYYYMMDD_HHMM.csv files");
    series->add_option("--output", o.output, "Output directory");
    common(series);

    auto* augment = app.add_subcommand("augment", "Extend a series backwards with sampled weeks");
    augment->add_option("--input", o.input, "Series CSV (with .meta sidecar)")->required();
    augment->add_option("--output", o.output, "Output directory")->required();
    augment->add_option("--seed", o.seed, "Random seed")->required();
    augment->add_option("--weeks", o.weeks, "Weeks to prepend (default 8)");
    augment->add_option("--fraction", o.fraction, "Share of points used for the group statistics");
    common(augment);

    auto* decompose = app.add_subcommand("decompose", "STL decomposition of a series");
    decompose->add_option("--input", o.input, "Series CSV (with .meta sidecar)")->required();
    decompose->add_option("--output", o.output, "Output directory")->required();
    common(decompose);

    auto* detect = app.add_subcommand("detect", "Collective and point anomalies from a decomposition");
    detect->add_option("--input", o.input, "Decomposition CSV")->required();
    detect->add_option("--output", o.output, "Output directory (default: print the report)");
    detect->add_option("--kind", o.kind, "count or saturation (default: from the file name)");
    detect->add_option("--synthetic-points", o.synthetic_points, "Leading points that came from augmentation");
    common(detect);

    auto* run = app.add_subcommand("run", "Full pipeline");
    run->add_option("--input", o.input, "Directory of segment CSVs");
    run->add_option("--output", o.output, "Output directory");
    run->add_option("--seed", o.seed, "Augmentation seed");
    run->add_option("--weeks", o.weeks, "Weeks to prepend");
    run->add_flag("--no-augment", o.no_augment, "Skip the backward extension");
    common(run);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic segment directory");
    synth->add_option("--output", o.output, "Output directory")->required();
    synth->add_option("--seed", o.seed, "Noise seed")->required();
    synth->add_option("--weeks", o.weeks, "Weeks to generate (default 12)");
    synth->add_option("--config", o.config, "Scenario JSON")->check(CLI::ExistingFile);

    auto* plot = app.add_subcommand("plot-data", "Write plot-ready CSVs for one series");
    plot->add_option("--report", o.report, "Report JSON")->required();
    plot->add_option("--decomposition", o.decomposition, "Decomposition CSV")->required();
    plot->add_option("--input", o.input, "Analysed series CSV (with .meta sidecar)")->required();
    plot->add_option("--output", o.output, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(o);
        if (*series) return cmd_series(o);
        if (*augment) return cmd_augment(o);
        if (*decompose) return cmd_decompose(o);
        if (*detect) return cmd_detect(o);
        if (*run) return cmd_run(o);
        if (*synth) return cmd_synth(o);
        if (*plot) return cmd_plot(o);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]%s%s: %s\n", to_string(e.kind()), e.stage().empty() ? "" : " stage=",
                     e.stage().c_str(), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
