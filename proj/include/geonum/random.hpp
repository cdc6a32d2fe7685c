#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "geonum/linalg.hpp"

namespace geonum {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of an independent stream (chain, term pool, ...) derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Uniform point in the closed Euclidean ball of the given radius in R^n.
inline RealVector uniform_in_ball(int n, double radius, Rng& rng) {
    std::normal_distribution<double> normal;
    RealVector x(n);
    double norm2 = 0;
    do {
        for (int i = 0; i < n; ++i) x(i) = normal(rng);
        norm2 = x.squaredNorm();
    } while (norm2 == 0.0);
    const double r = radius * std::pow(uniform01(rng), 1.0 / n);
    return x * (r / std::sqrt(norm2));
}

}  // namespace geonum
