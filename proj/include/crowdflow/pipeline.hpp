#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "crowdflow/report.hpp"
#include "crowdflow/series.hpp"
#include "crowdflow/stl.hpp"

namespace crowdflow {

struct AugmentConfig {
    bool enabled = true;
    int weeks = 8;
    std::uint64_t seed = 0;
    double fraction = 0.5;
};

struct SeriesSettings {
    StlConfig stl;
    EsdConfig esd;
};

struct PipelineConfig {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    FrameGeometry geometry;
    Seconds step = kQuarterHour;
    std::set<std::string> allowed_classes{"person"};
    AugmentConfig augment;
    SeriesSettings count;
    SeriesSettings saturation;
    /// Explicit analysis window; by default the span of the segment files.
    std::optional<TimeWindow> window;
    unsigned workers = 1;
    bool skip_bad_rows = false;

    /// Throws Error{validation} / Error{io} for unusable settings or a missing input directory.
    void validate() const;
};

/// Reads a JSON config. Unknown keys are rejected. Relative paths are kept as given.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct SeriesOutcome {
    IntervalSeries observed;
    IntervalSeries analysed;  // observed, extended backwards when augmentation is on
    StlDecomposition decomposition;
    AnomalyReport report;
};

struct PipelineResult {
    SeriesOutcome count;
    SeriesOutcome saturation;
    /// Stages recomputed in this run (cached stages are skipped).
    std::vector<std::string> executed_stages;
};

/// ingest -> series -> augment -> decompose -> detect -> plot-data.
///
/// Artifacts land in output_dir; `manifest.txt` records a fingerprint per stage
/// (inputs + settings) and a content hash per file. A stage whose fingerprint
/// matches and whose files are intact is loaded instead of recomputed. On
/// failure the error names the stage, the reports are removed and an
/// `INCOMPLETE` marker is written.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Reads and filters every segment file in `dir` (optionally in parallel).
std::vector<Segment> load_segments(const std::filesystem::path& dir, const FrameGeometry& geometry,
                                   const std::set<std::string>& allowed_classes, bool skip_bad_rows,
                                   unsigned workers = 1);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace crowdflow
