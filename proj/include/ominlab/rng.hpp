#pragma once

// Counter-based randomness: every draw is a pure function of
// (seed, stream, index), so results never depend on thread scheduling.

#include <cstdint>

namespace ominlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
        return splitmix64(splitmix64(splitmix64(seed_) ^ stream) ^ index);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t index) const {
        return static_cast<double>(bits(stream, index) >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi].
    std::int64_t integer(std::uint64_t stream, std::uint64_t index, std::int64_t lo, std::int64_t hi) const {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(bits(stream, index) % span);
    }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace ominlab
