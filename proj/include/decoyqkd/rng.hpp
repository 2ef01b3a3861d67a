#pragma once

#include <cstdint>

namespace decoyqkd::rng {

// SplitMix64 finalizer (Steele/Lea/Flood mixing constants).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Counter-based random stream: Stream(seed, index) is a deterministic
// function of its two arguments alone, so item `index` of a batch can be
// generated on any thread, in any order, with identical results.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t index) noexcept
        : state_(mix64(mix64(seed) ^ mix64(index ^ 0xA5A5A5A5A5A5A5A5ULL))) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform double in [0, 1), 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

} // namespace decoyqkd::rng
