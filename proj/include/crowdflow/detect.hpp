#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crowdflow/stl.hpp"

namespace crowdflow {

/// Band around the series median: upper = median + sigma is the collective
/// anomaly threshold; lower = median - sigma is kept for plotting only.
struct ThresholdSpec {
    double median = 0.0;
    double sigma = 0.0;  // population standard deviation
    double upper = 0.0;
    double lower = 0.0;
    bool degenerate = false;  // sigma == 0
};

/// Throws Error{insufficient_data} for an empty series.
ThresholdSpec compute_threshold(std::span<const double> original);
ThresholdSpec compute_threshold(const IntervalSeries& original);

struct CollectiveAnomaly {
    std::size_t start_index = 0;
    std::size_t end_index = 0;  // inclusive
    double peak_trend = 0.0;
    std::string label;
};

/// Maximal runs with trend > spec.upper, in chronological order.
std::vector<CollectiveAnomaly> collective_anomalies(std::span<const double> trend, const ThresholdSpec& spec);

struct EsdConfig {
    /// k_max; 0 means ceil(0.05 * n).
    std::size_t max_anomalies = 0;
    double alpha = 0.05;
    bool two_sided = true;
    /// Median/MAD instead of mean/SD for the studentized deviate.
    bool robust = false;
    /// Rank survivors by |residual| instead of signed residual.
    bool rank_by_magnitude = false;

    /// k_max for a series of length n.
    std::size_t resolved_max(std::size_t n) const;
};

struct EsdDetection {
    std::size_t index = 0;
    double test_statistic = 0.0;  // R_i
    double critical_value = 0.0;  // lambda_i
};

/// Rosner critical value lambda_i for step i (1-based) of a generalized ESD on n points.
double esd_critical_value(std::size_t n, std::size_t step, double alpha, bool two_sided);

/// Generalized ESD (Rosner 1983). Returns the first k removals, where k is the
/// largest step with R_k > lambda_k, in removal order. Stops early if the
/// remaining points have zero spread.
/// Throws Error{insufficient_data} unless n > k_max + 2, Error{validation} for
/// alpha outside (0, 1) or k_max == 0.
std::vector<EsdDetection> esd_test(std::span<const double> values, const EsdConfig& config);

struct PointAnomaly {
    std::size_t index = 0;
    Timestamp timestamp{};
    double residual = 0.0;
    double test_statistic = 0.0;
    double critical_value = 0.0;
    std::size_t rank = 0;  // 1 = largest residual
};

/// ESD on the STL residual, minus detections inside any collective run,
/// ranked by residual descending (ties: earlier index first).
std::vector<PointAnomaly> seasonal_esd(const StlDecomposition& decomposition,
                                       const std::vector<CollectiveAnomaly>& exclusions, const EsdConfig& config);

}  // namespace crowdflow
