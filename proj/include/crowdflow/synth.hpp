#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"

#include "crowdflow/ingest.hpp"
#include "crowdflow/timeutil.hpp"

namespace crowdflow {

/// Counts multiplied by `level_multiplier` over [start, end).
struct Plateau {
    Timestamp start{};
    Timestamp end{};
    double level_multiplier = 1.0;
};

/// `magnitude` extra detections in the interval containing `timestamp`.
struct Spike {
    Timestamp timestamp{};
    std::uint64_t magnitude = 0;
};

/// Description of a synthetic detection log.
///
/// Interval i has an intended people count round(profile[slot] * plateau
/// multiplier) plus any spike magnitude. With `jitter` the baseline part is a
/// Poisson draw around that mean instead. Every detection is an axis-aligned
/// square mask on its own tile of the frame, so heatmap saturation grows
/// linearly with the count until the tiles run out.
struct SyntheticScenario {
    Timestamp start{};  // must be on a quarter hour
    int weeks = 1;
    std::array<double, 96> daily_profile{};
    std::vector<Plateau> planted_plateaus;
    std::vector<Spike> planted_spikes;
    std::uint64_t noise_seed = 0;
    bool jitter = true;
    FrameGeometry geometry{128, 72, 1.0 / 60.0};
    int tile = 8;  // tile edge in pixels; masks are inset by one pixel on each side
    /// Extra non-person ("car") detections per frame, for class filtering.
    std::uint64_t distractors_per_frame = 0;

    std::size_t intervals() const { return static_cast<std::size_t>(weeks) * 7 * 96; }
    Timestamp interval_start(std::size_t i) const { return start + kQuarterHour * static_cast<std::int64_t>(i); }

    /// Throws Error{validation} for a bad geometry/tile, misaligned start or plants outside the horizon.
    void validate() const;
};

/// Pre-jitter intended count per interval.
std::vector<std::uint64_t> intended_counts(const SyntheticScenario& scenario);

struct FixtureSummary {
    /// Realized per-interval maximum person count.
    std::vector<std::uint64_t> counts;
    std::size_t files = 0;
    std::size_t rows = 0;
};

/// Writes one `YYYYMMDD_HHMM.csv` per interval into `output_dir` (created if
/// missing). Throws Error{io} when the directory cannot be written.
FixtureSummary generate_fixture(const SyntheticScenario& scenario, const std::filesystem::path& output_dir);

/// Pipeline config (JSON) matching the fixture's geometry, reading from `input_dir`.
nlohmann::json fixture_pipeline_config(const SyntheticScenario& scenario, const std::filesystem::path& input_dir);

/// Scenario from a JSON object (all keys optional except what the caller needs):
/// start, weeks, daily_profile (96 numbers or one constant), plateaus [{start,end,multiplier}],
/// spikes [{timestamp,magnitude}], seed, jitter, geometry {width,height,fps}, tile, distractors_per_frame.
SyntheticScenario scenario_from_json(const nlohmann::json& doc);

/// Scenario used by the end-to-end checks: 12 weeks, a two-day x5 plateau in
/// week 10 and a x10 spike on a weekday morning of week 11.
SyntheticScenario reference_scenario(std::uint64_t seed);

}  // namespace crowdflow
