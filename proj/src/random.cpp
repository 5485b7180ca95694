#include "crowdflow/random.hpp"

#include <cmath>
#include <numbers>

namespace crowdflow {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    // Sequential search from the mode keeps exp() away from underflow for large means.
    if (mean > 600.0) {
        const double x = std::round(mean + std::sqrt(mean) * normal());
        return x < 0 ? 0 : static_cast<std::uint64_t>(x);
    }
    const double u = uniform_open();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && p > 0.0) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

}  // namespace crowdflow
