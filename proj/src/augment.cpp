#include "crowdflow/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "crowdflow/error.hpp"
#include "crowdflow/stats.hpp"

namespace crowdflow {

GroupKey GroupKey::from_index(std::size_t index) {
    return GroupKey{static_cast<int>(index / 96), static_cast<int>((index % 96) / 4), static_cast<int>(index % 4) * 15};
}

GroupKey GroupKey::from_time(Timestamp t) {
    if (!is_aligned(t, kQuarterHour)) {
        throw Error(ErrorKind::alignment, format_iso8601(t) + " is not on a quarter hour", "timestamp");
    }
    return GroupKey{weekday_monday0(t), hour_of_day(t), minute_of_hour(t)};
}

const char* to_string(Family family) { return family == Family::gumbel ? "gumbel" : "laplace"; }

Family parse_family(std::string_view text) {
    if (text == "gumbel") return Family::gumbel;
    if (text == "laplace") return Family::laplace;
    throw Error(ErrorKind::configuration, "unknown distribution family '" + std::string(text) + "'", "family");
}

Family default_family(SeriesKind kind) { return kind == SeriesKind::count ? Family::gumbel : Family::laplace; }

std::vector<TimedValue> partition_for_stats(const IntervalSeries& series, double fraction, Rng& rng) {
    if (series.size() == 0) throw Error(ErrorKind::insufficient_data, "cannot partition an empty series", "series");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(ErrorKind::validation, "partition fraction must lie in (0, 1]", "fraction");
    }
    const std::size_t n = series.size();
    const auto take = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));

    // Partial Fisher-Yates: the first `take` slots become the sample.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());

    std::vector<TimedValue> out;
    out.reserve(take);
    for (std::size_t i : idx) out.push_back({series.time_at(i), series.values[i]});
    return out;
}

GroupedStats grouped_stats(const std::vector<TimedValue>& subset) {
    if (subset.empty()) throw Error(ErrorKind::insufficient_data, "no values to group", "subset");

    std::array<std::vector<double>, GroupKey::kCount> groups;
    std::array<std::vector<double>, 96> slots;  // (hour, minute) across weekdays
    std::vector<double> all;
    all.reserve(subset.size());
    for (const auto& tv : subset) {
        const GroupKey key = GroupKey::from_time(tv.time);
        groups[key.index()].push_back(tv.value);
        slots[key.index() % 96].push_back(tv.value);
        all.push_back(tv.value);
    }

    const GroupStat global{stats::median(all), stats::iqr(all), all.size(), GroupStat::Source::global};
    GroupedStats result;
    for (std::size_t k = 0; k < GroupKey::kCount; ++k) {
        const auto& g = groups[k];
        const auto& s = slots[k % 96];
        if (!g.empty()) {
            result.table[k] = {stats::median(g), stats::iqr(g), g.size(), GroupStat::Source::own};
        } else if (!s.empty()) {
            result.table[k] = {stats::median(s), stats::iqr(s), s.size(), GroupStat::Source::pooled_weekdays};
        } else {
            result.table[k] = global;
        }
    }
    return result;
}

double gumbel_from_uniform(const DistributionSpec& spec, double u) {
    if (!(spec.beta > 0.0)) return spec.mu;
    return spec.mu - spec.beta * std::log(-std::log(u));
}

double laplace_from_uniform(const DistributionSpec& spec, double u) {
    if (!(spec.beta > 0.0)) return spec.mu;
    const double d = u - 0.5;
    if (d == 0.0) return spec.mu;
    const double sign = d > 0.0 ? 1.0 : -1.0;
    return spec.mu - spec.beta * sign * std::log1p(-2.0 * std::abs(d));
}

double gumbel_cdf(const DistributionSpec& spec, double x) {
    if (!(spec.beta > 0.0)) return x < spec.mu ? 0.0 : 1.0;
    return std::exp(-std::exp(-(x - spec.mu) / spec.beta));
}

double laplace_cdf(const DistributionSpec& spec, double x) {
    if (!(spec.beta > 0.0)) return x < spec.mu ? 0.0 : 1.0;
    const double z = (x - spec.mu) / spec.beta;
    return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double sample_gumbel(const DistributionSpec& spec, Rng& rng) {
    if (spec.family != Family::gumbel) throw Error(ErrorKind::configuration, "spec is not a Gumbel spec", "family");
    return gumbel_from_uniform(spec, rng.uniform_open());
}

double sample_laplace(const DistributionSpec& spec, Rng& rng) {
    if (spec.family != Family::laplace) throw Error(ErrorKind::configuration, "spec is not a Laplace spec", "family");
    return laplace_from_uniform(spec, rng.uniform_open());
}

IntervalSeries extend_backward(const IntervalSeries& series, const GroupedStats& stats, int weeks, Family family,
                               Rng& rng) {
    if (weeks < 1) throw Error(ErrorKind::configuration, "weeks must be at least 1", "weeks");
    if (family != default_family(series.kind)) {
        throw Error(ErrorKind::configuration,
                    std::string("a ") + to_string(series.kind) + " series is extended with " +
                        to_string(default_family(series.kind)) + ", not " + to_string(family),
                    "family");
    }
    if (series.step != kQuarterHour) {
        throw Error(ErrorKind::configuration, "backward extension needs a 15-minute step", "step");
    }
    if (!is_aligned(series.start, kQuarterHour)) {
        throw Error(ErrorKind::alignment, "series start is not on a quarter hour", "start");
    }

    const std::size_t synthetic = GroupKey::kCount * static_cast<std::size_t>(weeks);
    IntervalSeries out;
    out.kind = series.kind;
    out.step = series.step;
    out.start = series.start - series.step * static_cast<std::int64_t>(synthetic);
    out.values.reserve(synthetic + series.size());

    for (std::size_t i = 0; i < synthetic; ++i) {
        const GroupStat& g = stats.at(GroupKey::from_time(out.time_at(i)));
        const DistributionSpec spec{family, g.median, g.iqr / 2.0};
        double v = family == Family::gumbel ? sample_gumbel(spec, rng) : sample_laplace(spec, rng);
        if (series.kind == SeriesKind::count) {
            v = std::max(0.0, std::round(v));
        } else {
            v = std::clamp(v, 0.0, 1.0);
        }
        out.values.push_back(v);
    }
    out.values.insert(out.values.end(), series.values.begin(), series.values.end());
    for (std::size_t g : series.gaps) out.gaps.push_back(g + synthetic);
    return out;
}

std::string grouped_stats_to_csv(const GroupedStats& stats) {
    std::string out = "weekday,hour,minute,median,iqr\n";
    for (std::size_t k = 0; k < GroupKey::kCount; ++k) {
        const GroupKey key = GroupKey::from_index(k);
        out += std::to_string(key.weekday) + ',' + std::to_string(key.hour) + ',' + std::to_string(key.minute) + ',' +
               format_double(stats.table[k].median) + ',' + format_double(stats.table[k].iqr) + '\n';
    }
    return out;
}

GroupedStats grouped_stats_from_csv(const std::string& csv) {
    GroupedStats stats;
    std::array<bool, GroupKey::kCount> seen{};
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "weekday,hour,minute,median,iqr") {
                throw Error(ErrorKind::schema, "grouped stats header must be 'weekday,hour,minute,median,iqr'");
            }
            header = false;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw Error(ErrorKind::validation, "grouped stats row needs 5 fields: " + line);
        const GroupKey key{std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2])};
        if (key.weekday < 0 || key.weekday > 6 || key.hour < 0 || key.hour > 23 || key.minute % 15 != 0 ||
            key.minute < 0 || key.minute > 45) {
            throw Error(ErrorKind::validation, "invalid group key in row: " + line);
        }
        GroupStat& g = stats.table[key.index()];
        g.median = std::stod(fields[3]);
        g.iqr = std::stod(fields[4]);
        if (g.iqr < 0.0) throw Error(ErrorKind::validation, "negative IQR in row: " + line, "iqr");
        seen[key.index()] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        throw Error(ErrorKind::validation, "grouped stats table is missing keys");
    }
    return stats;
}

}  // namespace crowdflow
