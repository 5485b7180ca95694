#include "crowdflow/stl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "crowdflow/error.hpp"
#include "crowdflow/loess.hpp"
#include "crowdflow/stats.hpp"

namespace crowdflow {

namespace {

int next_odd(int v) { return v % 2 == 0 ? v + 1 : v; }

}  // namespace

int default_trend_window(int period, int seasonal_window) {
    const double target = 1.5 * period / (1.0 - 1.5 / seasonal_window);
    return next_odd(static_cast<int>(std::ceil(target)));
}

StlConfig StlConfig::resolved() const {
    StlConfig r = *this;
    r.seasonal_window = next_odd(std::max(r.seasonal_window, 3));
    if (r.trend_window <= 0) r.trend_window = default_trend_window(r.period, r.seasonal_window);
    if (r.lowpass_window <= 0) r.lowpass_window = next_odd(r.period);
    return r;
}

void StlConfig::validate() const {
    if (period < 2) throw Error(ErrorKind::validation, "STL period must be at least 2", "period");
    for (auto [name, w] : {std::pair{"seasonal_window", seasonal_window}, std::pair{"trend_window", trend_window},
                           std::pair{"lowpass_window", lowpass_window}}) {
        if (w < 3 || w % 2 == 0) {
            throw Error(ErrorKind::validation, std::string(name) + " must be odd and at least 3", name);
        }
    }
    if (inner_iterations < 1) throw Error(ErrorKind::validation, "inner_iterations must be >= 1", "inner_iterations");
    if (outer_iterations < 0) throw Error(ErrorKind::validation, "outer_iterations must be >= 0", "outer_iterations");
    if (loess_degree != 0 && loess_degree != 1) {
        throw Error(ErrorKind::validation, "loess_degree must be 0 or 1", "loess_degree");
    }
}

namespace {

std::vector<double> positions(std::size_t n, double first) {
    std::vector<double> p(n);
    std::iota(p.begin(), p.end(), first);
    return p;
}

// Moving average of length `len`; output has size n - len + 1.
std::vector<double> moving_average(const std::vector<double>& x, std::size_t len) {
    const std::size_t n = x.size();
    std::vector<double> out(n - len + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) sum += x[i];
    const double scale = static_cast<double>(len);
    out[0] = sum / scale;
    for (std::size_t i = 1; i < out.size(); ++i) {
        sum += x[i + len - 1] - x[i - 1];
        out[i] = sum / scale;
    }
    return out;
}

struct StlState {
    std::vector<double> trend;
    std::vector<double> seasonal;
};

// Cycle-subseries smoothing. Returns n + 2 * period values: each subseries is
// smoothed at its own points and extrapolated one cycle to either side.
std::vector<double> smooth_cycle_subseries(const std::vector<double>& detrended, const StlConfig& cfg,
                                           const std::vector<double>& rw, bool use_rw) {
    const std::size_t n = detrended.size();
    const auto period = static_cast<std::size_t>(cfg.period);
    std::vector<double> out(n + 2 * period, 0.0);
    std::vector<double> sub, sub_w;
    for (std::size_t j = 0; j < period; ++j) {
        sub.clear();
        sub_w.clear();
        for (std::size_t i = j; i < n; i += period) {
            sub.push_back(detrended[i]);
            if (use_rw) sub_w.push_back(rw[i]);
        }
        const std::size_t k = sub.size();
        const auto x = positions(k, 1.0);
        const auto eval = positions(k + 2, 0.0);  // 0 and k+1 are the extrapolated ends
        LoessResult fit;
        if (k == 1) {
            fit.fitted.assign(k + 2, sub[0]);
        } else {
            fit = loess_smooth(x, sub, eval, cfg.seasonal_window, cfg.loess_degree,
                               use_rw ? std::span<const double>(sub_w) : std::span<const double>{});
        }
        for (std::size_t m = 0; m < k + 2; ++m) out[m * period + j] = fit.fitted[m];
    }
    return out;
}

void inner_loop(const std::vector<double>& y, const StlConfig& cfg, const std::vector<double>& rw, bool use_rw,
                StlState& state) {
    const std::size_t n = y.size();
    const auto period = static_cast<std::size_t>(cfg.period);
    const auto x = positions(n, 1.0);
    std::vector<double> work(n);
    for (int pass = 0; pass < cfg.inner_iterations; ++pass) {
        for (std::size_t i = 0; i < n; ++i) work[i] = y[i] - state.trend[i];
        const auto cycle = smooth_cycle_subseries(work, cfg, rw, use_rw);

        auto lowpass = moving_average(moving_average(moving_average(cycle, period), period), 3);
        const auto low = loess_smooth(x, lowpass, x, cfg.lowpass_window, cfg.loess_degree).fitted;

        for (std::size_t i = 0; i < n; ++i) {
            state.seasonal[i] = cycle[period + i] - low[i];
            work[i] = y[i] - state.seasonal[i];
        }
        state.trend = loess_smooth(x, work, x, cfg.trend_window, cfg.loess_degree,
                                   use_rw ? std::span<const double>(rw) : std::span<const double>{})
                          .fitted;
    }
}

std::vector<double> bisquare_weights(const std::vector<double>& y, const StlState& state) {
    const std::size_t n = y.size();
    std::vector<double> abs_res(n);
    for (std::size_t i = 0; i < n; ++i) abs_res[i] = std::abs(y[i] - state.trend[i] - state.seasonal[i]);
    const double h = 6.0 * stats::median(abs_res);
    const double h_hi = 0.999 * h;
    const double h_lo = 0.001 * h;
    std::vector<double> rw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = abs_res[i];
        if (r <= h_lo) {
            rw[i] = 1.0;
        } else if (r <= h_hi) {
            const double u = r / h;
            rw[i] = (1.0 - u * u) * (1.0 - u * u);
        } else {
            rw[i] = 0.0;
        }
    }
    return rw;
}

}  // namespace

StlDecomposition stl_decompose(const std::vector<double>& values, const StlConfig& config) {
    const StlConfig cfg = config.resolved();
    cfg.validate();
    const std::size_t n = values.size();
    if (n < 2 * static_cast<std::size_t>(cfg.period)) {
        throw Error(ErrorKind::insufficient_data,
                    "STL needs at least two periods (" + std::to_string(2 * cfg.period) + " points), got " +
                        std::to_string(n),
                    "series");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::validation, "STL input must be finite", "series");
    }

    StlState state{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    std::vector<double> rw(n, 1.0);
    bool use_rw = false;
    for (int outer = 0;; ++outer) {
        inner_loop(values, cfg, rw, use_rw, state);
        if (outer >= cfg.outer_iterations) break;
        rw = bisquare_weights(values, state);
        use_rw = true;
    }

    StlDecomposition d;
    d.observed = values;
    d.trend = std::move(state.trend);
    d.seasonal = std::move(state.seasonal);
    d.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.residual[i] = values[i] - d.trend[i] - d.seasonal[i];
    d.robustness_weights = use_rw ? std::move(rw) : std::vector<double>(n, 1.0);
    return d;
}

StlDecomposition stl_decompose(const IntervalSeries& series, const StlConfig& config) {
    StlDecomposition d = stl_decompose(series.values, config);
    d.start = series.start;
    d.step = series.step;
    d.kind = series.kind;
    return d;
}

namespace {

double variance(const std::vector<double>& v) {
    const double sd = stats::population_sd(v);
    return sd * sd;
}

}  // namespace

SeasonalStrength seasonal_strength(const StlDecomposition& d) {
    std::vector<double> detrended(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) detrended[i] = d.residual[i] + d.seasonal[i];
    const double denom = variance(detrended);
    if (!(denom > 0.0)) return {0.0, true};
    return {std::clamp(1.0 - variance(d.residual) / denom, 0.0, 1.0), false};
}

std::string decomposition_to_csv(const StlDecomposition& d) {
    std::string out = "timestamp,observed,trend,seasonal,residual\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += format_iso8601(d.time_at(i));
        for (double v : {d.observed[i], d.trend[i], d.seasonal[i], d.residual[i]}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

StlDecomposition decomposition_from_csv(const std::string& csv, SeriesKind kind) {
    StlDecomposition d;
    d.kind = kind;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    std::vector<Timestamp> stamps;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "timestamp,observed,trend,seasonal,residual") {
                throw Error(ErrorKind::schema, "decomposition header must be 'timestamp,observed,trend,seasonal,residual'");
            }
            header = false;
            continue;
        }
        const auto fields = split_csv_line(line);
        auto ts = fields.size() == 5 ? parse_iso8601(fields[0]) : std::nullopt;
        if (!ts) throw Error(ErrorKind::validation, "malformed decomposition row: " + line);
        double v[4];
        for (int k = 0; k < 4; ++k) {
            const auto& f = fields[static_cast<std::size_t>(k) + 1];
            if (std::from_chars(f.data(), f.data() + f.size(), v[k]).ptr != f.data() + f.size() || f.empty()) {
                throw Error(ErrorKind::validation, "malformed decomposition row: " + line);
            }
        }
        stamps.push_back(*ts);
        d.observed.push_back(v[0]);
        d.trend.push_back(v[1]);
        d.seasonal.push_back(v[2]);
        d.residual.push_back(v[3]);
    }
    if (!stamps.empty()) {
        d.start = stamps.front();
        if (stamps.size() >= 2) d.step = stamps[1] - stamps[0];
        for (std::size_t i = 0; i < stamps.size(); ++i) {
            if (stamps[i] != d.time_at(i)) throw Error(ErrorKind::validation, "decomposition rows are not regular");
        }
    }
    d.robustness_weights.assign(d.size(), 1.0);
    return d;
}

}  // namespace crowdflow
