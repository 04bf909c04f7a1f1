#pragma once

#include <cstdint>

namespace streamspan {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Keyed PRF over (seed, tag, id). Same inputs give the same word on every
// run, so sampling decisions can be replayed by any component that knows
// the seed.
inline std::uint64_t prf_word(std::uint64_t seed, std::uint64_t tag, std::uint64_t id) {
    std::uint64_t x = splitmix64(seed ^ 0x5EEDC0FFEE123457ULL);
    x = splitmix64(x ^ tag);
    x = splitmix64(x ^ id);
    return x;
}

// Bernoulli(p) draw from the PRF.
inline bool prf_coin(std::uint64_t seed, std::uint64_t tag, std::uint64_t id, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    const long double limit = static_cast<long double>(p) * 18446744073709551616.0L;
    return static_cast<long double>(prf_word(seed, tag, id)) < limit;
}

// Uniform draw from [0, bound) by rejection; avoids the modulo bias of the
// naive reduction and does not depend on library distribution internals.
template <typename Rng>
std::uint64_t bounded_uniform(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

// Uniform real in [lo, hi] with 53 random bits.
template <typename Rng>
double uniform_real(Rng& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

} // namespace streamspan
