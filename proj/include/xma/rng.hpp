#pragma once

#include <cstdint>

namespace xma {

// splitmix64 step: advances *state and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t* state) {
    std::uint64_t z = (*state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ seeded from splitmix64. Counter-based stream derivation:
// a (seed, stream_id) pair always yields the same generator, so clips,
// classes and training stages each own an independent stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(&sm);
    }

    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t sm = seed ^ (stream_id * 0x9E3779B97F4A7C15ULL);
        return Rng(splitmix64(&sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) using the top 53 bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log argument.
    double uniform01_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Box-Muller without state caching: consumes two draws per sample so the
    // stream position stays a pure function of the call count.
    double normal();

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace xma
