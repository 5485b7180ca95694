#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crowdflow/series.hpp"

namespace crowdflow {

/// STL parameters. Windows are in samples; zero means "use the default".
struct StlConfig {
    int period = 96;            // one day of 15-minute samples
    int seasonal_window = 673;  // one week of samples, forced odd
    int trend_window = 0;       // default: smallest odd >= 1.5 * period / (1 - 1.5 / seasonal_window)
    int lowpass_window = 0;     // default: smallest odd >= period
    int inner_iterations = 2;
    int outer_iterations = 1;
    int loess_degree = 1;

    /// Copy with defaults filled in and the seasonal window forced odd.
    StlConfig resolved() const;
    /// Throws Error{validation} unless windows are odd and >= 3, period >= 2 and iteration counts are sane.
    void validate() const;
};

int default_trend_window(int period, int seasonal_window);

struct StlDecomposition {
    Timestamp start{};
    Seconds step = kQuarterHour;
    SeriesKind kind = SeriesKind::count;
    std::vector<double> observed;
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;  // observed - trend - seasonal
    std::vector<double> robustness_weights;

    std::size_t size() const { return observed.size(); }
    Timestamp time_at(std::size_t i) const { return start + step * static_cast<std::int64_t>(i); }
};

/// Seasonal-trend decomposition by Loess (Cleveland, Cleveland, McRae & Terpenning 1990):
/// inner loop of detrending, cycle-subseries smoothing, low-pass filtering and trend
/// smoothing; outer loop of bisquare robustness weights.
/// Throws Error{insufficient_data} when the series is shorter than two periods.
StlDecomposition stl_decompose(const IntervalSeries& series, const StlConfig& config);

/// Same on a bare vector (start/step left at their defaults).
StlDecomposition stl_decompose(const std::vector<double>& values, const StlConfig& config);

struct SeasonalStrength {
    double value = 0.0;
    bool degenerate = false;
};

/// 1 - Var(residual) / Var(residual + seasonal), clamped to [0, 1].
SeasonalStrength seasonal_strength(const StlDecomposition& decomposition);

/// `timestamp,observed,trend,seasonal,residual`
std::string decomposition_to_csv(const StlDecomposition& decomposition);
StlDecomposition decomposition_from_csv(const std::string& csv, SeriesKind kind);

}  // namespace crowdflow
