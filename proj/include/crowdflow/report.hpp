#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "crowdflow/augment.hpp"
#include "crowdflow/detect.hpp"
#include "crowdflow/stl.hpp"

namespace crowdflow {

struct AugmentEcho {
    int weeks = 0;
    std::uint64_t seed = 0;
    double fraction = 0.5;
    Family family = Family::gumbel;
};

/// Detection outcome for one series plus the settings that produced it.
struct AnomalyReport {
    SeriesKind kind = SeriesKind::count;
    Timestamp start{};
    Seconds step = kQuarterHour;
    std::size_t length = 0;
    /// Leading points produced by backward extension (0 when not augmented).
    std::size_t synthetic_points = 0;

    ThresholdSpec threshold;
    std::vector<CollectiveAnomaly> collective;
    std::vector<PointAnomaly> points;

    EsdConfig esd;  // max_anomalies resolved against `length`
    StlConfig stl;  // resolved
    std::optional<AugmentEcho> augment;

    Timestamp time_at(std::size_t i) const { return start + step * static_cast<std::int64_t>(i); }
    bool is_synthetic(std::size_t i) const { return i < synthetic_points; }
};

/// Threshold on the decomposed series, collective runs on its trend, then
/// seasonal ESD on its residual with those runs excluded.
AnomalyReport detect_anomalies(const StlDecomposition& decomposition, const StlConfig& stl, const EsdConfig& esd,
                               std::size_t synthetic_points = 0, std::optional<AugmentEcho> augment = std::nullopt);

/// JSON document with keys series_kind, threshold, collective, points, config_echo.
nlohmann::ordered_json report_to_json(const AnomalyReport& report);
AnomalyReport report_from_json(const nlohmann::json& doc);

std::string report_to_string(const AnomalyReport& report);

/// Writes the plot-ready CSVs for one series into `output_dir`:
///   <kind>_series.csv        timestamp,value,synthetic,gap
///   <kind>_threshold.csv     timestamp,observed,trend,lower,median,upper,collective
///   <kind>_residual.csv      timestamp,residual,point,rank
///   <kind>_decomposition.csv timestamp,observed,trend,seasonal,residual
/// Throws Error{validation} when the inputs disagree in length or start.
void emit_plot_data(const AnomalyReport& report, const StlDecomposition& decomposition, const IntervalSeries& series,
                    const std::filesystem::path& output_dir);

}  // namespace crowdflow
