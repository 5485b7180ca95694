#include "crowdflow/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdflow/error.hpp"
#include "crowdflow/stats.hpp"

namespace crowdflow {

ThresholdSpec compute_threshold(std::span<const double> original) {
    if (original.empty()) throw Error(ErrorKind::insufficient_data, "threshold needs a non-empty series", "series");
    ThresholdSpec spec;
    spec.median = stats::median(original);
    spec.sigma = stats::population_sd(original);
    spec.upper = spec.median + spec.sigma;
    spec.lower = spec.median - spec.sigma;
    spec.degenerate = !(spec.sigma > 0.0);
    return spec;
}

ThresholdSpec compute_threshold(const IntervalSeries& original) { return compute_threshold(original.values); }

std::vector<CollectiveAnomaly> collective_anomalies(std::span<const double> trend, const ThresholdSpec& spec) {
    std::vector<CollectiveAnomaly> runs;
    std::size_t i = 0;
    while (i < trend.size()) {
        if (!(trend[i] > spec.upper)) {
            ++i;
            continue;
        }
        CollectiveAnomaly run;
        run.start_index = i;
        run.peak_trend = trend[i];
        while (i < trend.size() && trend[i] > spec.upper) {
            run.peak_trend = std::max(run.peak_trend, trend[i]);
            ++i;
        }
        run.end_index = i - 1;
        run.label = "collective-" + std::to_string(runs.size() + 1);
        runs.push_back(std::move(run));
    }
    return runs;
}

std::size_t EsdConfig::resolved_max(std::size_t n) const {
    if (max_anomalies > 0) return max_anomalies;
    return static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
}

double esd_critical_value(std::size_t n, std::size_t step, double alpha, bool two_sided) {
    const double remaining = static_cast<double>(n - step + 1);  // n - i + 1
    const double p = two_sided ? 1.0 - alpha / (2.0 * remaining) : 1.0 - alpha / remaining;
    const double dof = static_cast<double>(n - step - 1);
    const double t = stats::student_t_quantile(p, dof);
    return static_cast<double>(n - step) * t / std::sqrt((dof + t * t) * remaining);
}

std::vector<EsdDetection> esd_test(std::span<const double> values, const EsdConfig& config) {
    const std::size_t n = values.size();
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw Error(ErrorKind::validation, "ESD alpha must lie in (0, 1)", "alpha");
    }
    const std::size_t k_max = config.resolved_max(n);
    if (k_max == 0) throw Error(ErrorKind::validation, "ESD max_anomalies must be at least 1", "max_anomalies");
    if (n <= k_max + 2) {
        throw Error(ErrorKind::insufficient_data,
                    "ESD needs more than max_anomalies + 2 = " + std::to_string(k_max + 2) + " points, got " +
                        std::to_string(n),
                    "series");
    }

    std::vector<double> remaining(values.begin(), values.end());
    std::vector<std::size_t> origin(n);
    for (std::size_t i = 0; i < n; ++i) origin[i] = i;

    std::vector<EsdDetection> steps;
    std::size_t last_significant = 0;
    for (std::size_t step = 1; step <= k_max; ++step) {
        const double center = config.robust ? stats::median(remaining) : stats::mean(remaining);
        const double spread = config.robust ? stats::scaled_mad(remaining) : stats::sample_sd(remaining);
        if (!(spread > 0.0)) break;

        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            const double dev = config.two_sided ? std::abs(remaining[j] - center) : remaining[j] - center;
            if (dev > best) {
                best = dev;
                arg = j;
            }
        }
        const double r = best / spread;
        const double lambda = esd_critical_value(n, step, config.alpha, config.two_sided);
        steps.push_back({origin[arg], r, lambda});
        if (r > lambda) last_significant = step;

        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(arg));
        origin.erase(origin.begin() + static_cast<std::ptrdiff_t>(arg));
    }
    steps.resize(last_significant);
    return steps;
}

std::vector<PointAnomaly> seasonal_esd(const StlDecomposition& decomposition,
                                       const std::vector<CollectiveAnomaly>& exclusions, const EsdConfig& config) {
    const auto detections = esd_test(decomposition.residual, config);

    std::vector<PointAnomaly> points;
    for (const auto& d : detections) {
        const bool excluded = std::any_of(exclusions.begin(), exclusions.end(), [&](const CollectiveAnomaly& run) {
            return d.index >= run.start_index && d.index <= run.end_index;
        });
        if (excluded) continue;
        PointAnomaly p;
        p.index = d.index;
        p.timestamp = decomposition.time_at(d.index);
        p.residual = decomposition.residual[d.index];
        p.test_statistic = d.test_statistic;
        p.critical_value = d.critical_value;
        points.push_back(p);
    }

    const bool by_magnitude = config.rank_by_magnitude;
    std::sort(points.begin(), points.end(), [by_magnitude](const PointAnomaly& a, const PointAnomaly& b) {
        const double ka = by_magnitude ? std::abs(a.residual) : a.residual;
        const double kb = by_magnitude ? std::abs(b.residual) : b.residual;
        if (ka != kb) return ka > kb;
        return a.index < b.index;
    });
    for (std::size_t i = 0; i < points.size(); ++i) points[i].rank = i + 1;
    return points;
}

}  // namespace crowdflow
