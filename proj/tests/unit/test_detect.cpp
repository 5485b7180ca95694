#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "crowdflow/detect.hpp"
#include "crowdflow/error.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crowdflow;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(gen);
    return v;
}

std::set<std::size_t> indices(const std::vector<EsdDetection>& d) {
    std::set<std::size_t> s;
    for (const auto& x : d) s.insert(x.index);
    return s;
}

StlDecomposition from_residual(const std::vector<double>& residual) {
    StlDecomposition d;
    d.observed = residual;
    d.trend.assign(residual.size(), 0.0);
    d.seasonal.assign(residual.size(), 0.0);
    d.residual = residual;
    d.robustness_weights.assign(residual.size(), 1.0);
    return d;
}

}  // namespace

TEST(Threshold, HandComputedExample) {
    const std::vector<double> v{0, 0, 0, 10};
    const auto t = compute_threshold(v);
    EXPECT_EQ(t.median, 0.0);
    EXPECT_NEAR(t.sigma, std::sqrt(18.75), 1e-12);
    EXPECT_NEAR(t.upper, 4.330127, 1e-6);
    EXPECT_NEAR(t.lower, -4.330127, 1e-6);
    EXPECT_FALSE(t.degenerate);
}

TEST(Threshold, ConstantSeriesIsDegenerate) {
    const auto t = compute_threshold(std::vector<double>(10, 3.5));
    EXPECT_EQ(t.upper, 3.5);
    EXPECT_EQ(t.sigma, 0.0);
    EXPECT_TRUE(t.degenerate);
}

TEST(Threshold, ShiftEquivariance) {
    auto v = normal_sample(101, 4);
    const auto a = compute_threshold(v);
    for (double& x : v) x += 12.0;
    const auto b = compute_threshold(v);
    EXPECT_NEAR(b.upper, a.upper + 12.0, 1e-12);
    EXPECT_NEAR(b.sigma, a.sigma, 1e-12);
}

TEST(Threshold, EvenLengthMedianInterpolates) {
    EXPECT_EQ(compute_threshold(std::vector<double>{4, 1, 3, 2}).median, 2.5);
    EXPECT_THROW(compute_threshold(std::vector<double>{}), Error);
}

TEST(Collective, RunExtraction) {
    ThresholdSpec spec;
    spec.upper = 4.0;
    const auto runs = collective_anomalies(std::vector<double>{0, 5, 6, 0}, spec);
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_EQ(runs[0].start_index, 1u);
    EXPECT_EQ(runs[0].end_index, 2u);
    EXPECT_EQ(runs[0].peak_trend, 6.0);
    EXPECT_TRUE(collective_anomalies(std::vector<double>{1, 2, 3, 4}, spec).empty());
}

TEST(Collective, RunsPartitionTheExceedances) {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> trend(200);
        for (double& x : trend) x = u(gen);
        ThresholdSpec spec;
        spec.upper = 0.6;
        const auto runs = collective_anomalies(trend, spec);
        std::vector<int> covered(trend.size(), 0);
        for (std::size_t r = 0; r < runs.size(); ++r) {
            if (r > 0) EXPECT_GT(runs[r].start_index, runs[r - 1].end_index + 1);
            for (std::size_t i = runs[r].start_index; i <= runs[r].end_index; ++i) ++covered[i];
        }
        for (std::size_t i = 0; i < trend.size(); ++i) EXPECT_EQ(covered[i], trend[i] > 0.6 ? 1 : 0);
    }
}

TEST(Esd, CriticalValuesMatchFrozenAndBoost) {
    const auto& ref = fixture::reference_data().at("esd");
    const auto lambdas = ref.at("lambda").get<std::vector<double>>();
    const std::size_t n = ref.at("n");
    for (std::size_t i = 1; i <= lambdas.size(); ++i) {
        EXPECT_NEAR(esd_critical_value(n, i, 0.05, true), lambdas[i - 1], 1e-9);
    }
    for (std::size_t nn : {10u, 54u, 300u, 5000u}) {
        for (std::size_t i : {1u, 3u, 7u}) {
            for (double alpha : {0.01, 0.05, 0.2}) {
                EXPECT_NEAR(esd_critical_value(nn, i, alpha, true), oracle::rosner_lambda(nn, i, alpha), 1e-9);
                EXPECT_NEAR(esd_critical_value(nn, i, alpha, false), oracle::rosner_lambda(nn, i, 2.0 * alpha), 1e-9);
            }
        }
    }
}

TEST(Esd, PlantedOutliers) {
    auto v = normal_sample(1000, 2024);
    const std::set<std::size_t> planted{11, 250, 499, 700, 933};
    int sign = 1;
    for (auto i : planted) {
        v[i] = 8.0 * sign;
        sign = -sign;
    }
    const auto d = esd_test(v, EsdConfig{});
    EXPECT_EQ(indices(d), planted);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i].critical_value, oracle::rosner_lambda(1000, i + 1, 0.05), 1e-9);
}

TEST(Esd, OneSidedIgnoresLowOutliers) {
    auto v = normal_sample(500, 5);
    v[10] = 9.0;
    v[20] = -9.0;
    EsdConfig c;
    c.two_sided = false;
    const auto d = indices(esd_test(v, c));
    EXPECT_TRUE(d.count(10));
    EXPECT_FALSE(d.count(20));
    c.two_sided = true;
    EXPECT_TRUE(indices(esd_test(v, c)).count(20));
}

TEST(Esd, AllEqualValuesGiveNothing) {
    EXPECT_TRUE(esd_test(std::vector<double>(100, 2.0), EsdConfig{}).empty());
}

TEST(Esd, AffineInvariance) {
    auto v = normal_sample(300, 77);
    v[3] = 6.0;
    v[150] = -5.5;
    v[299] = 4.5;
    const auto base = esd_test(v, EsdConfig{});
    ASSERT_FALSE(base.empty());
    for (auto [a, b] : {std::pair{2.5, -7.0}, std::pair{1e-3, 1e3}, std::pair{40.0, 0.0}}) {
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = a * v[i] + b;
        const auto d = esd_test(w, EsdConfig{});
        EXPECT_EQ(indices(d), indices(base));
        EXPECT_LE(d.size(), EsdConfig{}.resolved_max(v.size()));
    }
}

TEST(Esd, RobustVariantFindsPlantedPoints) {
    auto v = normal_sample(400, 31);
    v[100] = 12.0;
    v[101] = 12.5;
    EsdConfig c;
    c.robust = true;
    const auto d = indices(esd_test(v, c));
    EXPECT_TRUE(d.count(100) && d.count(101));
}

TEST(Esd, ConfigErrors) {
    const auto v = normal_sample(20, 1);
    const auto kind = [&](EsdConfig c) {
        try {
            esd_test(v, c);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io;
    };
    EsdConfig c;
    c.alpha = 0.0;
    EXPECT_EQ(kind(c), ErrorKind::validation);
    c.alpha = 1.0;
    EXPECT_EQ(kind(c), ErrorKind::validation);
    c = {};
    c.max_anomalies = 18;
    EXPECT_EQ(kind(c), ErrorKind::insufficient_data);
    EXPECT_EQ(EsdConfig{}.resolved_max(54), 3u);
}

TEST(SeasonalEsd, PlantedSpikeIsRankOne) {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> y(24 * 30);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 10 + 4 * std::sin(2 * M_PI * i / 24.0) + noise(gen);
    y[400] += 15.0;
    StlConfig c;
    c.period = 24;
    // A 7-sample seasonal window lets the seasonal term soak up an isolated spike.
    c.seasonal_window = 673;
    const auto d = stl_decompose(y, c);
    const auto points = seasonal_esd(d, {}, EsdConfig{});
    ASSERT_FALSE(points.empty());
    EXPECT_EQ(points[0].index, 400u);
    EXPECT_EQ(points[0].rank, 1u);
}

TEST(SeasonalEsd, ExclusionsAreTotal) {
    auto r = normal_sample(300, 12);
    r[50] = 9.0;
    r[52] = 8.0;
    const auto d = from_residual(r);
    const std::vector<CollectiveAnomaly> runs{{45, 60, 0.0, "collective-1"}};
    EXPECT_FALSE(seasonal_esd(d, {}, EsdConfig{}).empty());
    EXPECT_TRUE(seasonal_esd(d, runs, EsdConfig{}).empty());
}

TEST(SeasonalEsd, OnlySpikesOutsideRunsSurvive) {
    auto r = normal_sample(600, 13);
    r[100] = 7.0;  // inside
    r[120] = 9.0;  // inside
    r[400] = 8.0;  // outside
    r[550] = 6.5;  // outside
    const auto d = from_residual(r);
    const std::vector<CollectiveAnomaly> runs{{90, 130, 0.0, "collective-1"}};
    const auto pre = indices(esd_test(r, EsdConfig{}));
    EXPECT_TRUE(pre.count(100) && pre.count(120));
    const auto points = seasonal_esd(d, runs, EsdConfig{});
    std::vector<std::size_t> got;
    for (const auto& p : points) got.push_back(p.index);
    EXPECT_EQ(got, (std::vector<std::size_t>{400, 550}));
    for (std::size_t i = 0; i < points.size(); ++i) {
        EXPECT_EQ(points[i].rank, i + 1);
        EXPECT_EQ(points[i].residual, r[points[i].index]);
        EXPECT_EQ(points[i].timestamp, d.time_at(points[i].index));
    }
}

TEST(SeasonalEsd, RankingIsByResidualWithEarlierFirstOnTies) {
    auto r = normal_sample(500, 14);
    r[300] = 7.0;
    r[30] = 7.0;
    r[200] = -8.0;
    const auto points = seasonal_esd(from_residual(r), {}, EsdConfig{});
    std::vector<std::size_t> got;
    for (const auto& p : points) got.push_back(p.index);
    ASSERT_GE(got.size(), 3u);
    EXPECT_EQ(got[0], 30u);
    EXPECT_EQ(got[1], 300u);
    EXPECT_EQ(got.back(), 200u);
    for (std::size_t i = 1; i < points.size(); ++i) EXPECT_GE(points[i - 1].residual, points[i].residual);
}
