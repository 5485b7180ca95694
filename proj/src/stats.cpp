#include "crowdflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace crowdflow::stats {

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double prob) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, prob);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double iqr(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

double mean(std::span<const double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

namespace {

double sum_sq_dev(std::span<const double> values, double m) {
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss;
}

}  // namespace

double population_sd(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::sqrt(sum_sq_dev(values, mean(values)) / static_cast<double>(values.size()));
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    return std::sqrt(sum_sq_dev(values, mean(values)) / static_cast<double>(values.size() - 1));
}

double scaled_mad(std::span<const double> values) {
    const double med = median(values);
    std::vector<double> dev;
    dev.reserve(values.size());
    for (double v : values) dev.push_back(std::abs(v - med));
    return 1.4826 * median(dev);
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete_beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double inverse_incomplete_beta(double a, double b, double p) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("inverse_incomplete_beta: a and b must be positive");
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;

    // Initial guess (Abramowitz & Stegun 26.5.22 for a, b >= 1; power-law tails otherwise).
    double x;
    if (a >= 1.0 && b >= 1.0) {
        const double pp = p < 0.5 ? p : 1.0 - p;
        const double t = std::sqrt(-2.0 * std::log(pp));
        double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if (p < 0.5) z = -z;
        const double al = (z * z - 3.0) / 6.0;
        const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        const double w = z * std::sqrt(al + h) / h -
                         (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        x = a / (a + b * std::exp(2.0 * w));
    } else {
        const double lna = std::log(a / (a + b));
        const double lnb = std::log(b / (a + b));
        const double t = std::exp(a * lna) / a;
        const double u = std::exp(b * lnb) / b;
        const double w = t + u;
        if (p < t / w) {
            x = std::pow(a * w * p, 1.0 / a);
        } else {
            x = 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
        }
    }

    // Halley iterations on I_x(a, b) - p.
    const double log_norm = -log_beta(a, b);
    const double a1 = a - 1.0;
    const double b1 = b - 1.0;
    for (int iter = 0; iter < 100; ++iter) {
        if (x <= 0.0 || x >= 1.0) break;
        const double err = incomplete_beta(a, b, x) - p;
        const double density = std::exp(a1 * std::log(x) + b1 * std::log1p(-x) + log_norm);
        if (density <= 0.0 || !std::isfinite(density)) break;
        const double u = err / density;
        const double step = u / (1.0 - 0.5 * std::min(1.0, u * (a1 / x - b1 / (1.0 - x))));
        double next = x - step;
        if (next <= 0.0) next = 0.5 * x;
        if (next >= 1.0) next = 0.5 * (x + 1.0);
        const double moved = std::abs(next - x);
        x = next;
        if (moved <= 1e-15 * x) break;
    }
    return x;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw std::domain_error("student_t_cdf: dof must be positive");
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
    if (!(dof > 0.0)) throw std::domain_error("student_t_quantile: dof must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t_quantile: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    const double tail = p < 0.5 ? p : 1.0 - p;
    // P(|T| > t) = I_{dof/(dof+t^2)}(dof/2, 1/2)
    const double x = inverse_incomplete_beta(0.5 * dof, 0.5, 2.0 * tail);
    const double t = std::sqrt(dof * (1.0 - x) / x);
    return p < 0.5 ? -t : t;
}

}  // namespace crowdflow::stats
