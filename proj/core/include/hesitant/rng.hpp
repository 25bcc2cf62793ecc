#pragma once

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <utility>

namespace hesitant {

// SplitMix64 finalizer. Every random decision in the library is derived from
// this function so results do not depend on the standard library vendor.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a sequence of counters into a single stream key, e.g. (seed, study, pass).
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t key = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t part : parts) {
        key = mix64(key ^ mix64(part + 0x632be59bd9b4e019ULL));
    }
    return key;
}

/// Uniform double in [0, 1) from a key, using the top 53 bits.
constexpr double unit_from_key(std::uint64_t key) noexcept {
    return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw: the value depends only on (key, index).
constexpr double counter_uniform(std::uint64_t key, std::uint64_t index) noexcept {
    return unit_from_key(key ^ mix64(index));
}

/// Sequential SplitMix64 stream for loops that consume many draws.
class SeqRng {
public:
    explicit constexpr SeqRng(std::uint64_t seed) noexcept : m_state(seed) {}

    constexpr std::uint64_t next() noexcept {
        m_state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = m_state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, bound) by rejection.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t draw = next();
        while (draw >= limit) draw = next();
        return draw % bound;
    }

private:
    std::uint64_t m_state;
};

template <class Vec>
void shuffle_in_place(Vec& values, SeqRng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(values[i - 1], values[j]);
    }
}

} // namespace hesitant
