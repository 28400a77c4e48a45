#pragma once

#include <cstdint>
#include <string_view>

// Deterministic RNG and hashing primitives. std::mt19937 is portable but the
// standard distributions are not; seeds here must give byte-identical output
// on every platform, so the bounded/real mappings are pinned explicitly.

namespace guardkit::detail {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline constexpr std::uint64_t fnv1a64(std::string_view s,
                                       std::uint64_t h = kFnvOffset) {
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// SplitMix64 stream generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        // Multiply-shift reduction; bias is negligible for bounds << 2^64
        // and, unlike std::uniform_int_distribution, identical everywhere.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Uniform double in [0, 1).
    double next_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [-1, 1).
    double next_signed_real() { return 2.0 * next_real() - 1.0; }

    bool bernoulli(double p) { return next_real() < p; }

private:
    std::uint64_t state_;
};

// Per-item seed derivation for parallel maps over records.
inline std::uint64_t item_seed(std::uint64_t global_seed, std::uint64_t index) {
    return mix(global_seed, index + 1);
}

}  // namespace guardkit::detail
