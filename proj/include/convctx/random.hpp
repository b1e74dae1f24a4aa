#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace convctx {

// mt19937_64 is bit-exact across standard libraries; the distribution
// helpers below are written out so that every draw is reproducible too
// (std::uniform_real_distribution and friends are implementation-defined).
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stable 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Mix a parent seed with a named stream, e.g. derive_seed(seed, "split").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept;

/// Per-node stream used by corpus featurization: hash(seed, tree_id, node_id).
std::uint64_t node_seed(std::uint64_t seed, std::string_view tree_id, std::string_view node_id) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept;

/// Standard normal via Box-Muller.
double standard_normal(Rng& rng) noexcept;

template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace convctx
