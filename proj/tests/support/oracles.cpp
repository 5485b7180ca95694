#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace oracle {

namespace {

bool on_segment(const crowdflow::Point& a, const crowdflow::Point& b, double px, double py) {
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (cross != 0.0) return false;
    return px >= std::min(a.x, b.x) && px <= std::max(a.x, b.x) && py >= std::min(a.y, b.y) &&
           py <= std::max(a.y, b.y);
}

}  // namespace

bool inside_or_on_boundary(const std::vector<crowdflow::Point>& poly, double px, double py) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if (on_segment(a, b, px, py)) return true;
        if ((a.y > py) != (b.y > py)) {
            const double xi = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
            if (px < xi) inside = !inside;
        }
    }
    return inside;
}

std::vector<std::uint8_t> brute_force_cells(const crowdflow::MaskGeometry& mask, int width, int height) {
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * height, 0);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            if (inside_or_on_boundary(mask.polygon, c + 0.5, r + 0.5)) cells[static_cast<std::size_t>(r) * width + c] = 1;
        }
    }
    return cells;
}

std::vector<double> reference_loess(std::span<const double> x, std::span<const double> y, std::span<const double> at,
                                    std::size_t q, int degree) {
    const std::size_t n = x.size();
    std::vector<double> out;
    for (double x0 : at) {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = std::abs(x[i] - x0);
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        double h;
        if (q <= n) {
            h = sorted[q - 1];
        } else {
            const double spacing = (x[n - 1] - x[0]) / static_cast<double>(n - 1);
            h = sorted[n - 1] + static_cast<double>((q - n) / 2) * spacing;
        }
        double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = d[i] / h;
            // the classic implementation's cutoffs: full weight near x0, none at the edge
            const double w = u > 0.999 ? 0.0 : u <= 0.001 ? 1.0 : std::pow(1.0 - u * u * u, 3);
            const double dx = x[i] - x0;
            s0 += w;
            s1 += w * dx;
            s2 += w * dx * dx;
            t0 += w * y[i];
            t1 += w * dx * y[i];
        }
        if (degree == 0) {
            out.push_back(t0 / s0);
        } else {
            // intercept of the local line in coordinates centred on x0
            out.push_back((s2 * t0 - s1 * t1) / (s0 * s2 - s1 * s1));
        }
    }
    return out;
}

double rosner_lambda(std::size_t n, std::size_t i, double alpha) {
    const double nn = static_cast<double>(n);
    const double ii = static_cast<double>(i);
    const double p = 1.0 - alpha / (2.0 * (nn - ii + 1.0));
    const boost::math::students_t dist(nn - ii - 1.0);
    const double t = boost::math::quantile(dist, p);
    return (nn - ii) * t / std::sqrt((nn - ii - 1.0 + t * t) * (nn - ii + 1.0));
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_p_value(double d, std::size_t n) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double sorted_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
