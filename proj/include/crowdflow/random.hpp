#pragma once

#include <cstdint>
#include <random>

namespace crowdflow {

/// Seeded random source with platform-independent output.
///
/// std::mt19937_64 is bit-specified by the standard, but the standard
/// distributions are not, so every variate used by the library is derived
/// from raw engine words here. `split` derives an independent child stream
/// from (seed, stream id) without touching the parent state, which lets
/// callers hand out per-task generators deterministically.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Standard normal via Box-Muller (one variate per call, the pair's twin is discarded).
    double normal();

    /// Poisson variate by CDF inversion; adequate for the small means used in fixtures.
    std::uint64_t poisson(double mean);

    Rng split(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream + 0x9e3779b97f4a7c15ULL))); }

    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace crowdflow
