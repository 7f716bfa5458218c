#pragma once

#include "geometry.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace alexcurv {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for a named purpose (FNV-1a of the name mixed with the parent).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(seed ^ mix64(h));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i) noexcept { return mix64(seed ^ mix64(i + 1)); }

/// Per-pair seed, symmetric in (i, j).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t j) noexcept {
    if (j < i) std::swap(i, j);
    return derive_seed(derive_seed(seed, i), j);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline Point gaussian_point(Rng& rng, Eigen::Index n, double sigma = 1.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    Point x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
    return x;
}

inline Point random_unit_vector(Rng& rng, Eigen::Index n) {
    for (;;) {
        Point v = gaussian_point(rng, n);
        const double r = v.norm();
        if (r > 1e-12) return v / r;
    }
}

/// Uniform sample from the region (ball, rejection against the box if present).
inline Point sample_in_region(Rng& rng, const Region& region) {
    const Eigen::Index n = region.dimension();
    for (int attempt = 0;; ++attempt) {
        const double r = region.radius() * std::pow(uniform01(rng), 1.0 / static_cast<double>(n));
        Point x = region.center() + r * random_unit_vector(rng, n);
        if (!region.box() || region.contains(x)) return x;
        if (attempt > 10000) return region.project(x);
    }
}

} // namespace alexcurv
