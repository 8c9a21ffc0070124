#pragma once

#include <cstdint>

namespace psieve {

// Counter-based keyed generator. Every random draw in the toolkit is a pure
// function of (key, counter), so results do not depend on visit order or on
// how work is split across threads.
//
//   mix64(key, counter) = fmix(fmix(key ^ kKeySalt) + (counter + 1) * kGolden)
//
// where fmix is the splitmix64 finalizer. Unit doubles take the top 53 bits.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kKeySalt = 0x243F6A8885A308D3ULL;

constexpr std::uint64_t fmix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t key, std::uint64_t counter) noexcept {
    return fmix64(fmix64(key ^ kKeySalt) + (counter + 1) * kGolden);
}

/// Maps 64 random bits to [0, 1) with 53-bit resolution.
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double keyed_unit(std::uint64_t key, std::uint64_t counter) noexcept {
    return bits_to_unit(mix64(key, counter));
}

/// Derives an independent sub-key, e.g. one per epoch or per purpose.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) noexcept {
    return mix64(key ^ 0xD1B54A32D192ED03ULL, tag);
}

/// Sequential stream over the keyed generator; used where a run of draws is
/// needed (shuffles, corpus synthesis). Copyable, so it can be replayed.
class KeyedStream {
public:
    explicit constexpr KeyedStream(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_u64() noexcept { return mix64(key_, counter_++); }
    constexpr double next_unit() noexcept { return bits_to_unit(next_u64()); }

    /// Unbiased integer in [0, bound) by rejection; bound must be > 0.
    constexpr std::uint64_t next_below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return r % bound;
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace psieve
