#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bfvar {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream seed for (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// FNV-1a, stable across platforms.
inline std::uint64_t hash_text(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

using Engine = std::mt19937_64;

// Standard normal and uniform draws written out explicitly so sequences do not
// depend on the standard library's distribution implementations.
inline double uniform01(Engine& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double standard_normal(Engine& eng);

// ln of a Gamma(shape, 1) variate; exact for any shape > 0 without underflow.
double log_gamma_variate(Engine& eng, double shape);

}  // namespace bfvar
