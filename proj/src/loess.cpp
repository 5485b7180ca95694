#include "crowdflow/loess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crowdflow/error.hpp"

namespace crowdflow {

namespace {

struct Neighborhood {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
};

// The `q` points nearest to xs; on equal distance the right-hand point wins.
Neighborhood nearest(std::span<const double> x, double xs, std::size_t q) {
    const std::size_t n = x.size();
    if (q >= n) return {0, n - 1};
    std::size_t right = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), xs) - x.begin());
    std::size_t left = right;  // window is [left, right)
    while (right - left < q) {
        if (left == 0) {
            ++right;
        } else if (right == n) {
            --left;
        } else if (x[right] - xs <= xs - x[left - 1]) {
            ++right;
        } else {
            --left;
        }
    }
    return {left, right - 1};
}

}  // namespace

LoessResult loess_smooth(std::span<const double> x, std::span<const double> y, std::span<const double> eval_points,
                         int window, int degree, std::span<const double> robustness_weights) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw Error(ErrorKind::validation, "loess needs equally sized non-empty x and y", "x");
    if (window < 3) throw Error(ErrorKind::validation, "loess window must be at least 3", "window");
    if (degree != 0 && degree != 1) throw Error(ErrorKind::validation, "loess degree must be 0 or 1", "degree");
    if (!robustness_weights.empty() && robustness_weights.size() != n) {
        throw Error(ErrorKind::validation, "robustness weights must match x in length", "robustness_weights");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x[i] > x[i - 1])) throw Error(ErrorKind::validation, "loess x must be strictly increasing", "x");
    }

    LoessResult result;
    const auto q = static_cast<std::size_t>(window);
    result.window_clamped = q > n;
    const double range = x[n - 1] - x[0];
    const double spacing = n > 1 ? range / static_cast<double>(n - 1) : 1.0;
    const double widen = q > n ? static_cast<double>((q - n) / 2) * spacing : 0.0;

    std::vector<double> w(n);
    result.fitted.reserve(eval_points.size());
    for (double xs : eval_points) {
        const Neighborhood nb = nearest(x, xs, q);
        const double h = std::max(xs - x[nb.first], x[nb.last] - xs) + widen;
        const double h_hi = 0.999 * h;
        const double h_lo = 0.001 * h;

        double total = 0.0;
        for (std::size_t j = nb.first; j <= nb.last; ++j) {
            const double r = std::abs(x[j] - xs);
            double wj = 0.0;
            if (r <= h_hi) {
                if (r <= h_lo) {
                    wj = 1.0;
                } else {
                    const double u = r / h;
                    const double t = 1.0 - u * u * u;
                    wj = t * t * t;
                }
                if (!robustness_weights.empty()) wj *= robustness_weights[j];
            }
            w[j] = wj;
            total += wj;
        }

        if (!(total > 0.0)) {
            const auto hit = std::lower_bound(x.begin(), x.end(), xs);
            if (hit != x.end() && *hit == xs) {
                result.fitted.push_back(y[static_cast<std::size_t>(hit - x.begin())]);
            } else {
                double sum = 0.0;
                for (std::size_t j = nb.first; j <= nb.last; ++j) sum += y[j];
                result.fitted.push_back(sum / static_cast<double>(nb.last - nb.first + 1));
            }
            continue;
        }

        for (std::size_t j = nb.first; j <= nb.last; ++j) w[j] /= total;
        if (degree == 1 && h > 0.0) {
            double center = 0.0;
            for (std::size_t j = nb.first; j <= nb.last; ++j) center += w[j] * x[j];
            double spread = 0.0;
            for (std::size_t j = nb.first; j <= nb.last; ++j) spread += w[j] * (x[j] - center) * (x[j] - center);
            if (std::sqrt(spread) > 0.001 * range) {
                const double slope = (xs - center) / spread;
                for (std::size_t j = nb.first; j <= nb.last; ++j) w[j] *= slope * (x[j] - center) + 1.0;
            }
        }
        double fit = 0.0;
        for (std::size_t j = nb.first; j <= nb.last; ++j) fit += w[j] * y[j];
        result.fitted.push_back(fit);
    }
    return result;
}

}  // namespace crowdflow
