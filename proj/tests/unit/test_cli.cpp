#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "crowdflow/report.hpp"

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Three synthetic weeks with one spike; writes pipeline.json next to the segments.
void synth_small(const fs::path& dir) {
    const fs::path scenario = dir.parent_path() / (dir.filename().string() + "_scenario.json");
    std::ofstream(scenario) << R"({"weeks": 3, "plateaus": [],
        "spikes": [{"timestamp": "2023-08-03T10:15:00Z", "magnitude": 50}]})";
    ASSERT_EQ(fixture::run_cli("synth --seed 4 --config " + q(scenario) + " --output " + q(dir)), 0);
    fs::remove(scenario);
}

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
    EXPECT_EQ(fixture::run_cli(""), 2);
    EXPECT_EQ(fixture::run_cli("frobnicate"), 2);
    EXPECT_EQ(fixture::run_cli("run --bogus"), 2);
    fixture::TempDir dir("cli_usage");
    EXPECT_EQ(fixture::run_cli("synth --output " + q(dir.path / "s")), 2);  // seed is required
    EXPECT_EQ(fixture::run_cli("augment --input x.csv --output " + q(dir.path)), 2);
    EXPECT_EQ(fixture::run_cli("--help"), 0);
}

TEST(Cli, ErrorKindsMapToExitCodes) {
    fixture::TempDir dir("cli_codes");
    const fs::path log = dir.path / "log.txt";
    fs::create_directories(dir.path / "empty");
    EXPECT_EQ(fixture::run_cli("run --input " + q(dir.path / "empty") + " --output " + q(dir.path / "o1"), log), 3);
    EXPECT_NE(slurp(log).find("stage=series"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir.path / "o1" / "INCOMPLETE"));

    EXPECT_EQ(fixture::run_cli("run --input " + q(dir.path / "missing") + " --output " + q(dir.path / "o2")), 4);

    std::ofstream(dir.path / "bad.json") << R"({"input_dir": "x", "unknown_key": 1})";
    EXPECT_EQ(fixture::run_cli("run --config " + q(dir.path / "bad.json"), log), 2);
    EXPECT_NE(slurp(log).find("unknown_key"), std::string::npos);

    std::ofstream(dir.path / "seg.csv") << "timestamp,class_id,class_name,confidence,x_min,y_min,x_max,y_max,mask\n"
                                           "2023-10-01T12:00:00Z,0,person,1.3,1,1,5,5,\"[(1,1),(5,1),(5,5)]\"\n";
    EXPECT_EQ(fixture::run_cli("ingest --input " + q(dir.path / "seg.csv"), log), 2);
    EXPECT_EQ(fixture::run_cli("ingest --skip-bad-rows --input " + q(dir.path / "seg.csv"), log), 0);
    EXPECT_NE(slurp(log).find("0 records"), std::string::npos);
}

TEST(Cli, StageByStageMatchesFullRun) {
    fixture::TempDir dir("cli_flow");
    const fs::path segs = dir.path / "segments", steps = dir.path / "steps", full = dir.path / "full";
    synth_small(segs);
    const std::string cfg = " --config " + q(segs / "pipeline.json");

    ASSERT_EQ(fixture::run_cli("run" + cfg + " --seed 7 --weeks 2 --output " + q(full)), 0);

    ASSERT_EQ(fixture::run_cli("series" + cfg + " --output " + q(steps)), 0);
    for (const char* kind : {"count", "saturation"}) {
        const std::string k = kind;
        ASSERT_EQ(fixture::run_cli("augment" + cfg + " --seed 7 --weeks 2 --input " + q(steps / (k + "_series.csv")) +
                                   " --output " + q(steps)),
                  0);
        ASSERT_EQ(fixture::run_cli("decompose" + cfg + " --input " + q(steps / (k + "_augmented.csv")) + " --output " +
                                   q(steps)),
                  0);
        ASSERT_EQ(fixture::run_cli("detect" + cfg + " --synthetic-points 1344 --input " +
                                   q(steps / (k + "_decomposition.csv")) + " --output " + q(steps)),
                  0);
        ASSERT_EQ(fixture::run_cli("plot-data --report " + q(steps / (k + "_report.json")) + " --decomposition " +
                                   q(steps / (k + "_decomposition.csv")) + " --input " +
                                   q(steps / (k + "_augmented.csv")) + " --output " + q(steps / "plot")),
                  0);
        for (const std::string file : {"_series.csv", "_series.meta", "_stats.csv", "_augmented.csv",
                                       "_augmented.meta", "_decomposition.csv"}) {
            EXPECT_EQ(slurp(steps / (k + file)), slurp(full / (k + file))) << k + file;
        }
        const auto a = nlohmann::json::parse(slurp(steps / (k + "_report.json")));
        const auto b = nlohmann::json::parse(slurp(full / (k + "_report.json")));
        EXPECT_EQ(a["threshold"], b["threshold"]);
        EXPECT_EQ(a["collective"], b["collective"]);
        EXPECT_EQ(a["points"], b["points"]);
        // the full run also records its augmentation settings
        EXPECT_TRUE(a["config_echo"]["augment"].is_null());
        EXPECT_EQ(b["config_echo"]["augment"]["seed"], 7);
    }
    const auto count = nlohmann::json::parse(slurp(full / "count_report.json"));
    ASSERT_FALSE(count["points"].empty());
    EXPECT_EQ(count["points"][0]["timestamp"], "2023-08-03T10:15:00Z");
}

TEST(Cli, DetectPrintsReportWithoutOutput) {
    fixture::TempDir dir("cli_detect");
    const fs::path segs = dir.path / "segments", out = dir.path / "out", log = dir.path / "log.txt";
    synth_small(segs);
    ASSERT_EQ(fixture::run_cli("run --no-augment --config " + q(segs / "pipeline.json") + " --output " + q(out)), 0);
    ASSERT_EQ(fixture::run_cli("detect --input " + q(out / "saturation_decomposition.csv"), log), 0);
    const auto printed = nlohmann::json::parse(slurp(log));
    EXPECT_EQ(printed["series_kind"], "saturation");
    EXPECT_EQ(printed["points"], nlohmann::json::parse(slurp(out / "saturation_report.json"))["points"]);
}
