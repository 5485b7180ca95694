#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "crowdflow/random.hpp"
#include "crowdflow/series.hpp"

namespace crowdflow {

/// (weekday, hour, minute) bucket of a 15-minute slot in the week. Monday = 0.
struct GroupKey {
    int weekday = 0;
    int hour = 0;
    int minute = 0;

    static constexpr std::size_t kCount = 7 * 24 * 4;

    std::size_t index() const {
        return static_cast<std::size_t>(weekday) * 96 + static_cast<std::size_t>(hour) * 4 +
               static_cast<std::size_t>(minute / 15);
    }
    static GroupKey from_index(std::size_t index);
    /// Throws Error{alignment} when `t` is not on a quarter hour.
    static GroupKey from_time(Timestamp t);

    bool operator==(const GroupKey&) const = default;
};

struct GroupStat {
    /// Where the numbers came from when the group itself was empty.
    enum class Source { own, pooled_weekdays, global };

    double median = 0.0;
    double iqr = 0.0;
    std::size_t samples = 0;
    Source source = Source::own;
};

struct GroupedStats {
    std::array<GroupStat, GroupKey::kCount> table{};

    const GroupStat& at(const GroupKey& key) const { return table[key.index()]; }
};

struct TimedValue {
    Timestamp time{};
    double value = 0.0;
};

enum class Family { gumbel, laplace };

const char* to_string(Family family);
Family parse_family(std::string_view text);

/// Family used for each series kind: count -> gumbel, saturation -> laplace.
Family default_family(SeriesKind kind);

struct DistributionSpec {
    Family family = Family::gumbel;
    double mu = 0.0;
    double beta = 1.0;  // quartile deviation IQR/2; 0 degrades to the constant mu
};

/// Uniform sample of ceil(fraction * n) points without replacement, returned in
/// chronological order. Throws Error{insufficient_data} for an empty series and
/// Error{validation} for fraction outside (0, 1].
std::vector<TimedValue> partition_for_stats(const IntervalSeries& series, double fraction, Rng& rng);

/// Median and IQR per (weekday, hour, minute). Empty groups fall back to the
/// same (hour, minute) pooled across weekdays, then to the global median/IQR.
/// Throws Error{insufficient_data} for an empty subset.
GroupedStats grouped_stats(const std::vector<TimedValue>& subset);

/// Inverse-transform maps from a uniform u in (0, 1).
double gumbel_from_uniform(const DistributionSpec& spec, double u);
double laplace_from_uniform(const DistributionSpec& spec, double u);

double gumbel_cdf(const DistributionSpec& spec, double x);
double laplace_cdf(const DistributionSpec& spec, double x);

double sample_gumbel(const DistributionSpec& spec, Rng& rng);
double sample_laplace(const DistributionSpec& spec, Rng& rng);

/// Prepends `weeks` * 672 synthetic points, each drawn from `family` with
/// mu = group median and beta = group IQR / 2 for the point's (w, h, m). Count
/// values are rounded and clamped at 0; saturation values are clamped to [0, 1].
/// The observed values are copied unchanged after the synthetic block.
/// Throws Error{configuration} for a family/kind mismatch or a non-15-minute step.
IntervalSeries extend_backward(const IntervalSeries& series, const GroupedStats& stats, int weeks, Family family,
                               Rng& rng);

/// `weekday,hour,minute,median,iqr`
std::string grouped_stats_to_csv(const GroupedStats& stats);
GroupedStats grouped_stats_from_csv(const std::string& csv);

}  // namespace crowdflow
