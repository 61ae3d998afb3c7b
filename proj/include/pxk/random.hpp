#pragma once

#include <cstdint>

namespace pxk {

// Deterministic xorshift-style generator (splitmix64 core).  All randomized
// machinery in the library derives from this so that runs are reproducible
// bit-for-bit given a seed, independent of the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

// Derives an independent stream from (seed, stream id); used to give each
// randomized stage of a pipeline its own reproducible generator.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
    Rng mix(seed ^ (0x5851f42d4c957f2dULL * (stream + 1)));
    mix.next_u64();
    return mix.next_u64();
}

} // namespace pxk
