#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "crowdflow/error.hpp"
#include "crowdflow/report.hpp"

#include "fixtures.hpp"

using namespace crowdflow;

namespace {

using Table = std::vector<std::vector<std::string>>;

Table read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    Table rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

struct Case {
    IntervalSeries series;
    StlDecomposition decomposition;
    AnomalyReport report;
};

// 20 days at period 24: a raised block of three days and two spikes outside it.
Case planted_case() {
    Case c;
    c.series.start = Timestamp{Seconds{1696204800}};
    std::mt19937_64 gen(17);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (int i = 0; i < 24 * 20; ++i) {
        double v = 5 + 2 * std::sin(2 * M_PI * i / 24.0) + noise(gen);
        if (i >= 24 * 8 && i < 24 * 11) v += 6.0;
        if (i == 60 || i == 400) v += 9.0;
        c.series.values.push_back(v);
    }
    StlConfig stl;
    stl.period = 24;
    c.decomposition = stl_decompose(c.series, stl);
    c.report = detect_anomalies(c.decomposition, stl.resolved(), EsdConfig{});
    return c;
}

}  // namespace

TEST(Report, DetectsPlantedStructure) {
    const auto c = planted_case();
    ASSERT_FALSE(c.report.collective.empty());
    bool overlaps = false;
    for (const auto& run : c.report.collective) overlaps |= run.start_index < 24 * 11 && run.end_index >= 24 * 8;
    EXPECT_TRUE(overlaps);
    ASSERT_GE(c.report.points.size(), 2u);
    EXPECT_EQ(c.report.esd.max_anomalies, EsdConfig{}.resolved_max(c.series.size()));
}

TEST(Report, JsonRoundTrip) {
    auto c = planted_case();
    c.report.synthetic_points = 48;
    c.report.augment = AugmentEcho{8, 99, 0.5, Family::laplace};
    const auto doc = report_to_json(c.report);
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"series_kind", "threshold", "collective", "points", "config_echo"}));
    EXPECT_EQ(doc["points"][0]["synthetic"], false);
    EXPECT_EQ(doc["config_echo"]["augment"]["family"], "laplace");

    const auto back = report_from_json(nlohmann::json::parse(doc.dump()));
    EXPECT_EQ(report_to_string(back), report_to_string(c.report));
    EXPECT_EQ(back.points.size(), c.report.points.size());
    EXPECT_EQ(back.threshold.upper, c.report.threshold.upper);
}

TEST(PlotData, ColumnsAgreeWithReport) {
    const auto c = planted_case();
    fixture::TempDir dir("plot");
    emit_plot_data(c.report, c.decomposition, c.series, dir.path);

    const auto threshold = read_csv(dir.path / "count_threshold.csv");
    ASSERT_EQ(threshold.size(), c.series.size() + 1);
    EXPECT_EQ(threshold[0], (std::vector<std::string>{"timestamp", "observed", "trend", "lower", "median", "upper", "collective"}));
    std::size_t flagged_run_rows = 0;
    for (std::size_t i = 1; i < threshold.size(); ++i) {
        EXPECT_EQ(std::stod(threshold[i][5]), c.report.threshold.upper);
        flagged_run_rows += threshold[i][6] != "0";
    }
    std::size_t run_length = 0;
    for (const auto& run : c.report.collective) run_length += run.end_index - run.start_index + 1;
    EXPECT_EQ(flagged_run_rows, run_length);

    const auto residual = read_csv(dir.path / "count_residual.csv");
    ASSERT_EQ(residual.size(), c.series.size() + 1);
    std::map<std::size_t, std::size_t> flagged;  // index -> rank
    for (std::size_t i = 1; i < residual.size(); ++i) {
        if (residual[i][2] == "1") flagged[i - 1] = std::stoul(residual[i][3]);
    }
    ASSERT_EQ(flagged.size(), c.report.points.size());
    for (const auto& p : c.report.points) {
        ASSERT_TRUE(flagged.count(p.index));
        EXPECT_EQ(flagged[p.index], p.rank);
    }

    const auto series = read_csv(dir.path / "count_series.csv");
    EXPECT_EQ(series[0], (std::vector<std::string>{"timestamp", "value", "synthetic", "gap"}));
    EXPECT_TRUE(std::filesystem::exists(dir.path / "count_decomposition.csv"));
}

TEST(PlotData, NoAnomaliesMeansNoFlags) {
    IntervalSeries s;
    s.start = Timestamp{Seconds{1696204800}};
    s.values.assign(96, 3.0);
    StlDecomposition d;
    d.start = s.start;
    d.observed = s.values;
    d.trend = s.values;
    d.seasonal.assign(96, 0.0);
    d.residual.assign(96, 0.0);
    d.robustness_weights.assign(96, 1.0);
    StlConfig stl;
    stl.period = 24;
    const auto report = detect_anomalies(d, stl.resolved(), EsdConfig{});
    EXPECT_TRUE(report.collective.empty());
    EXPECT_TRUE(report.points.empty());
    fixture::TempDir dir("plot_empty");
    emit_plot_data(report, d, s, dir.path);
    const auto threshold = read_csv(dir.path / "count_threshold.csv");
    for (std::size_t i = 1; i < threshold.size(); ++i) EXPECT_EQ(threshold[i][6], "0");
    const auto residual = read_csv(dir.path / "count_residual.csv");
    for (std::size_t i = 1; i < residual.size(); ++i) EXPECT_EQ(residual[i][2], "0");
}

TEST(PlotData, LengthMismatchIsRejected) {
    auto c = planted_case();
    c.series.values.pop_back();
    fixture::TempDir dir("plot_bad");
    try {
        emit_plot_data(c.report, c.decomposition, c.series, dir.path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::validation);
    }
}
