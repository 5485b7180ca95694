#include "crowdflow/report.hpp"

#include <algorithm>

#include "crowdflow/error.hpp"

namespace crowdflow {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

AnomalyReport detect_anomalies(const StlDecomposition& decomposition, const StlConfig& stl, const EsdConfig& esd,
                               std::size_t synthetic_points, std::optional<AugmentEcho> augment) {
    AnomalyReport report;
    report.kind = decomposition.kind;
    report.start = decomposition.start;
    report.step = decomposition.step;
    report.length = decomposition.size();
    report.synthetic_points = synthetic_points;
    report.stl = stl.resolved();
    report.esd = esd;
    report.esd.max_anomalies = esd.resolved_max(decomposition.size());
    report.augment = augment;

    report.threshold = compute_threshold(decomposition.observed);
    report.collective = collective_anomalies(decomposition.trend, report.threshold);
    report.points = seasonal_esd(decomposition, report.collective, report.esd);
    return report;
}

ordered_json report_to_json(const AnomalyReport& r) {
    ordered_json doc;
    doc["series_kind"] = to_string(r.kind);
    doc["threshold"] = {{"median", r.threshold.median},
                        {"sigma", r.threshold.sigma},
                        {"upper", r.threshold.upper},
                        {"lower", r.threshold.lower},
                        {"degenerate", r.threshold.degenerate}};

    ordered_json collective = ordered_json::array();
    for (const auto& c : r.collective) {
        collective.push_back({{"label", c.label},
                              {"start_index", c.start_index},
                              {"end_index", c.end_index},
                              {"start", format_iso8601(r.time_at(c.start_index))},
                              {"end", format_iso8601(r.time_at(c.end_index))},
                              {"peak_trend", c.peak_trend},
                              {"synthetic", r.is_synthetic(c.start_index)}});
    }
    doc["collective"] = std::move(collective);

    ordered_json points = ordered_json::array();
    for (const auto& p : r.points) {
        points.push_back({{"rank", p.rank},
                          {"index", p.index},
                          {"timestamp", format_iso8601(p.timestamp)},
                          {"residual", p.residual},
                          {"test_statistic", p.test_statistic},
                          {"critical_value", p.critical_value},
                          {"synthetic", r.is_synthetic(p.index)}});
    }
    doc["points"] = std::move(points);

    ordered_json echo;
    echo["series_start"] = format_iso8601(r.start);
    echo["step_seconds"] = r.step.count();
    echo["length"] = r.length;
    echo["synthetic_points"] = r.synthetic_points;
    echo["esd"] = {{"alpha", r.esd.alpha},
                   {"max_anomalies", r.esd.max_anomalies},
                   {"two_sided", r.esd.two_sided},
                   {"robust", r.esd.robust},
                   {"rank_by_magnitude", r.esd.rank_by_magnitude}};
    echo["stl"] = {{"period", r.stl.period},
                   {"seasonal_window", r.stl.seasonal_window},
                   {"trend_window", r.stl.trend_window},
                   {"lowpass_window", r.stl.lowpass_window},
                   {"inner_iterations", r.stl.inner_iterations},
                   {"outer_iterations", r.stl.outer_iterations},
                   {"loess_degree", r.stl.loess_degree}};
    if (r.augment) {
        echo["augment"] = {{"weeks", r.augment->weeks},
                           {"seed", r.augment->seed},
                           {"fraction", r.augment->fraction},
                           {"family", to_string(r.augment->family)}};
    } else {
        echo["augment"] = nullptr;
    }
    doc["config_echo"] = std::move(echo);
    return doc;
}

namespace {

Timestamp parse_ts(const json& j) {
    auto ts = parse_iso8601(j.get<std::string>());
    if (!ts) throw Error(ErrorKind::validation, "bad timestamp in report: " + j.get<std::string>());
    return *ts;
}

}  // namespace

AnomalyReport report_from_json(const json& doc) {
    try {
        AnomalyReport r;
        r.kind = parse_series_kind(doc.at("series_kind").get<std::string>());
        const auto& th = doc.at("threshold");
        r.threshold.median = th.at("median").get<double>();
        r.threshold.sigma = th.at("sigma").get<double>();
        r.threshold.upper = th.at("upper").get<double>();
        r.threshold.lower = th.at("lower").get<double>();
        r.threshold.degenerate = th.at("degenerate").get<bool>();

        const auto& echo = doc.at("config_echo");
        r.start = parse_ts(echo.at("series_start"));
        r.step = Seconds{echo.at("step_seconds").get<std::int64_t>()};
        r.length = echo.at("length").get<std::size_t>();
        r.synthetic_points = echo.at("synthetic_points").get<std::size_t>();
        const auto& esd = echo.at("esd");
        r.esd.alpha = esd.at("alpha").get<double>();
        r.esd.max_anomalies = esd.at("max_anomalies").get<std::size_t>();
        r.esd.two_sided = esd.at("two_sided").get<bool>();
        r.esd.robust = esd.at("robust").get<bool>();
        r.esd.rank_by_magnitude = esd.at("rank_by_magnitude").get<bool>();
        const auto& stl = echo.at("stl");
        r.stl.period = stl.at("period").get<int>();
        r.stl.seasonal_window = stl.at("seasonal_window").get<int>();
        r.stl.trend_window = stl.at("trend_window").get<int>();
        r.stl.lowpass_window = stl.at("lowpass_window").get<int>();
        r.stl.inner_iterations = stl.at("inner_iterations").get<int>();
        r.stl.outer_iterations = stl.at("outer_iterations").get<int>();
        r.stl.loess_degree = stl.at("loess_degree").get<int>();
        if (echo.contains("augment") && !echo.at("augment").is_null()) {
            const auto& a = echo.at("augment");
            r.augment = AugmentEcho{a.at("weeks").get<int>(), a.at("seed").get<std::uint64_t>(),
                                    a.at("fraction").get<double>(), parse_family(a.at("family").get<std::string>())};
        }

        for (const auto& c : doc.at("collective")) {
            r.collective.push_back({c.at("start_index").get<std::size_t>(), c.at("end_index").get<std::size_t>(),
                                    c.at("peak_trend").get<double>(), c.at("label").get<std::string>()});
        }
        for (const auto& p : doc.at("points")) {
            PointAnomaly pa;
            pa.rank = p.at("rank").get<std::size_t>();
            pa.index = p.at("index").get<std::size_t>();
            pa.timestamp = parse_ts(p.at("timestamp"));
            pa.residual = p.at("residual").get<double>();
            pa.test_statistic = p.at("test_statistic").get<double>();
            pa.critical_value = p.at("critical_value").get<double>();
            r.points.push_back(pa);
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::validation, std::string("malformed report: ") + e.what(), "report");
    }
}

std::string report_to_string(const AnomalyReport& report) { return report_to_json(report).dump(2) + "\n"; }

void emit_plot_data(const AnomalyReport& report, const StlDecomposition& decomposition, const IntervalSeries& series,
                    const fs::path& output_dir) {
    const std::size_t n = decomposition.size();
    if (series.size() != n || report.length != n) {
        throw Error(ErrorKind::validation, "report, decomposition and series lengths differ", "length");
    }
    if (series.start != decomposition.start || report.start != decomposition.start) {
        throw Error(ErrorKind::validation, "report, decomposition and series start times differ", "start");
    }
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + output_dir.string(), output_dir.string());

    const std::string kind = to_string(report.kind);
    std::vector<std::uint8_t> in_run(n, 0);
    for (const auto& c : report.collective) {
        for (std::size_t i = c.start_index; i <= c.end_index && i < n; ++i) in_run[i] = 1;
    }
    std::vector<std::size_t> rank(n, 0);
    for (const auto& p : report.points) {
        if (p.index < n) rank[p.index] = p.rank;
    }
    std::vector<std::uint8_t> gap(n, 0);
    for (std::size_t g : series.gaps) {
        if (g < n) gap[g] = 1;
    }

    std::string values = "timestamp,value,synthetic,gap\n";
    std::string threshold = "timestamp,observed,trend,lower,median,upper,collective\n";
    std::string residual = "timestamp,residual,point,rank\n";
    const std::string lower = format_double(report.threshold.lower);
    const std::string median = format_double(report.threshold.median);
    const std::string upper = format_double(report.threshold.upper);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string ts = format_iso8601(decomposition.time_at(i));
        values += ts + ',' + format_double(series.values[i]) + ',' + (report.is_synthetic(i) ? "1" : "0") + ',' +
                  (gap[i] ? "1" : "0") + '\n';
        threshold += ts + ',' + format_double(decomposition.observed[i]) + ',' + format_double(decomposition.trend[i]) +
                     ',' + lower + ',' + median + ',' + upper + ',' + (in_run[i] ? "1" : "0") + '\n';
        residual += ts + ',' + format_double(decomposition.residual[i]) + ',' + (rank[i] ? "1" : "0") + ',' +
                    std::to_string(rank[i]) + '\n';
    }
    write_text_file(output_dir / (kind + "_series.csv"), values);
    write_text_file(output_dir / (kind + "_threshold.csv"), threshold);
    write_text_file(output_dir / (kind + "_residual.csv"), residual);
    write_text_file(output_dir / (kind + "_decomposition.csv"), decomposition_to_csv(decomposition));
}

}  // namespace crowdflow
