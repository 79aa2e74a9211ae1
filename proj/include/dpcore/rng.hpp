#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dpcore {

// splitmix64 finalizer; used to derive independent stream seeds from a
// run seed plus arbitrary tags without correlated low bits.
inline uint64_t mix_seed(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t tag) {
    return mix_seed(base ^ mix_seed(tag));
}

inline uint64_t derive_seed(uint64_t base, uint64_t tag_a, uint64_t tag_b) {
    return derive_seed(derive_seed(base, tag_a), tag_b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed) { return Rng(mix_seed(seed)); }

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t n,
                                           double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace dpcore
