// Counter-based deterministic randomness.
//
// Every random draw in the library is a pure function of (key, counter),
// where the key chains a master seed with integer coordinates and tags.
// Evaluation order and thread schedule therefore never affect results.
#pragma once

#include <cstdint>
#include <cmath>

namespace homolab {

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Chainable hash key. with() folds another integer into the state.
struct HashKey {
    uint64_t state = 0;

    explicit HashKey(uint64_t seed = 0) : state(detail::splitmix64(seed)) {}

    HashKey with(uint64_t x) const {
        HashKey k;
        k.state = detail::splitmix64(state ^ (x + 0x9e3779b97f4a7c15ULL));
        return k;
    }
    HashKey with_signed(int64_t x) const { return with(static_cast<uint64_t>(x)); }
};

/// 64 uniformly distributed bits for (key, counter).
inline uint64_t hash_bits(const HashKey& key, uint64_t counter) {
    return detail::splitmix64(key.state ^ detail::splitmix64(counter * 0xda942042e4dd58b5ULL + 1));
}

/// Uniform double in [0, 1), 53 random bits.
inline double u01(const HashKey& key, uint64_t counter) {
    return static_cast<double>(hash_bits(key, counter) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; draw i consumes uniforms (2i, 2i+1).
inline double normal(const HashKey& key, uint64_t counter) {
    double u1 = u01(key, 2 * counter);
    double u2 = u01(key, 2 * counter + 1);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Poisson count by inverse-CDF scan; intended for moderate lambda.
inline int poisson(const HashKey& key, uint64_t counter, double lambda) {
    double u = u01(key, counter);
    double p = std::exp(-lambda), cdf = p;
    int k = 0;
    while (u > cdf && k < 4096) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

/// Index of the sampled category for cumulative probabilities.
inline int categorical(const HashKey& key, uint64_t counter, const double* probs, int n) {
    double u = u01(key, counter);
    double c = 0;
    for (int i = 0; i < n; ++i) {
        c += probs[i];
        if (u < c) return i;
    }
    return n - 1;
}

}  // namespace homolab
