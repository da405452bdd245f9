#pragma once

#include <cstdint>

namespace amink {

// Counter-based generator: the j-th coordinate of the i-th sample depends
// only on (seed, i, j), so results are independent of how sample ranges are
// partitioned across workers.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t counter_bits(uint64_t seed, uint64_t index, uint64_t dim) {
    uint64_t h = mix64(seed ^ 0xD1B54A32D192ED03ull);
    h = mix64(h ^ index * 0x9E3779B97F4A7C15ull);
    h = mix64(h ^ dim * 0xE7037ED1A0B428DBull);
    return h;
}

// Uniform double in [0, 1).
inline double counter_uniform(uint64_t seed, uint64_t index, uint64_t dim) {
    return static_cast<double>(counter_bits(seed, index, dim) >> 11) * 0x1.0p-53;
}

}  // namespace amink
