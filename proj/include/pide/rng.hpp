#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pide {

using RngEngine = std::mt19937_64;

/// splitmix64 finalizer; used to derive well-mixed stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Folds a list of tags into one seed. Used for (master_seed, path) and
/// (seed, step, epoch) style stream derivation: every consumer of
/// randomness gets its own stream, so results do not depend on execution
/// order or thread count.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x8c95b5a1f3c6e2d9ULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

inline RngEngine make_stream(std::uint64_t master, std::uint64_t stream_id) {
    return RngEngine(mix_seed({master, stream_id}));
}

/// One Gamma(shape, rate) draw; density rate^shape z^{shape-1} e^{-rate z} / Gamma(shape).
inline double sample_gamma_one(double shape, double rate, RngEngine& rng) {
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

std::vector<double> sample_gamma(double shape, double rate, std::size_t count, RngEngine& rng);

/// Number of jump events in a window of length dt at the given rate.
/// intensity == 0 consumes no randomness and always returns 0.
long sample_poisson_count(double intensity, double dt, RngEngine& rng);

}  // namespace pide
