#include "fixtures.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sys/wait.h>
#include <sstream>

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace crowdflow;

namespace fixture {

TempDir::TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("crowdflow_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
}

const nlohmann::json& reference_data() {
    static const nlohmann::json data = [] {
        std::ifstream in(fs::path(CROWDFLOW_TEST_DATA_DIR) / "reference.json");
        return nlohmann::json::parse(in);
    }();
    return data;
}

namespace {

std::string stamp(std::int64_t epoch_seconds, bool with_zone) {
    using namespace std::chrono;
    const sys_seconds t{seconds{epoch_seconds}};
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d%s", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()), with_zone ? "Z" : "");
    return buf;
}

std::string stem(std::int64_t epoch_seconds) {
    std::string s = stamp(epoch_seconds, false);  // YYYY-MM-DDTHH:MM:SS
    return s.substr(0, 4) + s.substr(5, 2) + s.substr(8, 2) + "_" + s.substr(11, 2) + s.substr(14, 2);
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string row(const std::string& ts, int class_id, const std::string& name, const MaskGeometry& mask) {
    double x0 = mask.polygon[0].x, x1 = x0, y0 = mask.polygon[0].y, y1 = y0;
    std::string poly = "[";
    for (std::size_t i = 0; i < mask.polygon.size(); ++i) {
        const auto& p = mask.polygon[i];
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
        poly += (i ? ",(" : "(") + num(p.x) + "," + num(p.y) + ")";
    }
    poly += "]";
    return ts + "," + std::to_string(class_id) + "," + name + ",0.9," + num(x0) + "," + num(y0) + "," + num(x1) + "," +
           num(y1) + ",\"" + poly + "\"\n";
}

double signed_area(const std::vector<Point>& p) {
    double a = 0.0;
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) a += p[j].x * p[i].y - p[i].x * p[j].y;
    return a / 2.0;
}

MaskGeometry random_mask(std::mt19937_64& gen, int width, int height) {
    std::uniform_int_distribution<int> xs(0, 2 * width), ys(0, 2 * height), shape(0, 2), extra(4, 6);
    for (;;) {
        MaskGeometry m;
        const int kind = shape(gen);
        if (kind == 0) {
            double ax = xs(gen) / 2.0, bx = xs(gen) / 2.0, ay = ys(gen) / 2.0, by = ys(gen) / 2.0;
            if (ax > bx) std::swap(ax, bx);
            if (ay > by) std::swap(ay, by);
            m.polygon = {{ax, ay}, {bx, ay}, {bx, by}, {ax, by}};
        } else {
            const int k = kind == 1 ? 3 : extra(gen);
            for (int i = 0; i < k; ++i) m.polygon.push_back({xs(gen) / 2.0, ys(gen) / 2.0});
        }
        if (signed_area(m.polygon) != 0.0) return m;
    }
}

}  // namespace

AggregationFixture write_random_aggregation_fixture(const fs::path& dir, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> width_d(6, 40), height_d(4, 24), intervals_d(3, 8), people_d(0, 6),
        cars_d(0, 2), fps_d(0, 3);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    AggregationFixture fx;
    fx.geometry.width = width_d(gen);
    fx.geometry.height = height_d(gen);
    static constexpr int kFrames[] = {15, 10, 3, 1};
    const int frames = kFrames[fps_d(gen)];
    fx.geometry.fps = static_cast<double>(frames) / 900.0;
    fx.frames = static_cast<std::size_t>(frames);
    const std::int64_t frame_gap = 900 / frames;

    // 2023-10-02T00:00Z plus a random number of quarter hours
    const std::int64_t start = 1696204800 + 900 * std::uniform_int_distribution<std::int64_t>(0, 2000)(gen);
    const int intervals = intervals_d(gen);
    fx.window = {Timestamp{Seconds{start}}, Timestamp{Seconds{start + 900 * intervals}}};

    const std::size_t cells = static_cast<std::size_t>(fx.geometry.width) * fx.geometry.height;
    for (int i = 0; i < intervals; ++i) {
        const std::int64_t t0 = start + 900 * i;
        if (coin(gen) < 0.15) {
            fx.expected_count.push_back(0.0);
            fx.expected_saturation.push_back(0.0);
            fx.expected_gaps.push_back(static_cast<std::size_t>(i));
            continue;
        }
        std::string csv = "timestamp,class_id,class_name,confidence,x_min,y_min,x_max,y_max,mask\n";
        std::size_t max_people = 0;
        std::uint64_t occupancy = 0;
        for (int f = 0; f < frames; ++f) {
            if (coin(gen) < 0.3) continue;  // frame without detections
            const std::string ts = stamp(t0 + f * frame_gap, coin(gen) < 0.5);
            const int people = people_d(gen);
            const int cars = cars_d(gen);
            std::vector<std::uint8_t> frame_union(cells, 0);
            for (int p = 0; p < people; ++p) {
                const MaskGeometry m = random_mask(gen, fx.geometry.width, fx.geometry.height);
                csv += row(ts, 0, "person", m);
                const auto covered = oracle::brute_force_cells(m, fx.geometry.width, fx.geometry.height);
                for (std::size_t c = 0; c < cells; ++c) frame_union[c] |= covered[c];
            }
            for (int c = 0; c < cars; ++c) csv += row(ts, 2, "car", random_mask(gen, fx.geometry.width, fx.geometry.height));
            max_people = std::max(max_people, static_cast<std::size_t>(people));
            for (auto v : frame_union) occupancy += v;
        }
        std::ofstream(dir / (stem(t0) + ".csv"), std::ios::binary) << csv;
        fx.expected_count.push_back(static_cast<double>(max_people));
        // One correctly rounded division of exact integers: the value of
        // sum(255 * occupied / frames) / (width * height * 255).
        fx.expected_saturation.push_back(static_cast<double>(occupancy) /
                                         (static_cast<double>(frames) * static_cast<double>(cells)));
    }
    return fx;
}

AggregationFixture write_full_coverage_fixture(const fs::path& dir, int intervals) {
    AggregationFixture fx;
    fx.geometry = {16, 9, 15.0 / 900.0};
    fx.frames = 15;
    const std::int64_t start = 1696204800;
    fx.window = {Timestamp{Seconds{start}}, Timestamp{Seconds{start + 900 * intervals}}};
    const MaskGeometry full{{{0, 0}, {16, 0}, {16, 9}, {0, 9}}};
    for (int i = 0; i < intervals; ++i) {
        std::string csv = "timestamp,class_id,class_name,confidence,x_min,y_min,x_max,y_max,mask\n";
        for (int f = 0; f < 15; ++f) csv += row(stamp(start + 900 * i + 60 * f, true), 0, "person", full);
        std::ofstream(dir / (stem(start + 900 * i) + ".csv"), std::ios::binary) << csv;
        fx.expected_count.push_back(1.0);
        fx.expected_saturation.push_back(1.0);
    }
    return fx;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[fs::relative(entry.path(), dir).generic_string()] = ss.str();
    }
    return out;
}

int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd = std::string("\"") + CROWDFLOW_CLI_PATH + "\" " + args;
    cmd += log.empty() ? " >/dev/null 2>&1" : " >\"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

}  // namespace fixture
