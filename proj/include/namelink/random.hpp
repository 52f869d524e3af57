#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace namelink {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to turn (seed, index...) tuples into
/// well-separated child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic child seed for a position in a nested job structure,
/// e.g. derive_seed(seed, {column}) or derive_seed(seed, {depth, width, fold}).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix_seed(seed);
    for (std::uint64_t p : path) s = mix_seed(s ^ mix_seed(p + 0x632be59bd9b4e019ULL));
    return s;
}

} // namespace namelink
