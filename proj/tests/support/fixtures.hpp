#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "crowdflow/ingest.hpp"
#include "crowdflow/series.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

/// Frozen values from tests/data/reference.json.
const nlohmann::json& reference_data();

/// A directory of segment CSVs written without the library, with the
/// expected series computed by brute force (per-frame recount and per-cell
/// point-in-polygon over every frame).
struct AggregationFixture {
    crowdflow::FrameGeometry geometry;
    crowdflow::TimeWindow window;
    std::size_t frames = 0;  // nominal frames per interval
    std::vector<double> expected_count;
    std::vector<double> expected_saturation;
    std::vector<std::size_t> expected_gaps;
};

AggregationFixture write_random_aggregation_fixture(const std::filesystem::path& dir, std::uint64_t seed);

/// Every frame of every interval carries one mask over the whole frame.
AggregationFixture write_full_coverage_fixture(const std::filesystem::path& dir, int intervals);

/// Relative path -> file content for every regular file below `dir`.
std::map<std::string, std::string> read_tree(const std::filesystem::path& dir);

/// Runs the command-line tool with `args`; returns its exit status. Output goes to `log` if given.
int run_cli(const std::string& args, const std::filesystem::path& log = {});

}  // namespace fixture
