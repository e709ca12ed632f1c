#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace coinrisk {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn a stage name into a stream tag.
constexpr std::uint64_t stage_tag(std::string_view name) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed for stage `stage` of a run with master seed `master`. Units inside a
/// stage (replications, dates, pairs) add their index to this value.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) noexcept {
    return mix64(master ^ stage_tag(stage));
}

} // namespace coinrisk
