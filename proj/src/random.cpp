#include "convctx/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace convctx {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept {
    return splitmix64(splitmix64(seed) ^ fnv1a64(stream));
}

std::uint64_t node_seed(std::uint64_t seed, std::string_view tree_id, std::string_view node_id) noexcept {
    // The length prefix keeps ("ab", "c") and ("a", "bc") apart.
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ fnv1a64(tree_id) ^ (static_cast<std::uint64_t>(tree_id.size()) << 48));
    h = splitmix64(h ^ fnv1a64(node_id));
    return h;
}

double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

double standard_normal(Rng& rng) noexcept {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace convctx
