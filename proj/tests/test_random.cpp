#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "convctx/random.hpp"

using namespace convctx;

TEST_CASE("seed derivation is stable and stream-sensitive") {
    CHECK(derive_seed(42, "walk") == derive_seed(42, "walk"));
    CHECK(derive_seed(42, "walk") != derive_seed(42, "train"));
    CHECK(derive_seed(42, "walk") != derive_seed(43, "walk"));
    CHECK(node_seed(1, "t", "n1") != node_seed(1, "t", "n2"));
    // Concatenation ambiguity must not collide.
    CHECK(node_seed(1, "ab", "c") != node_seed(1, "a", "bc"));
    // FNV-1a reference values.
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("uniform01 stays in [0, 1) with the right mean") {
    Rng rng(3);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(rng);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform_index covers its range evenly") {
    Rng rng(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[uniform_index(rng, 7)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK(uniform_index(rng, 1) == 0);
}

TEST_CASE("standard_normal moments") {
    Rng rng(9);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = standard_normal(rng);
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("shuffle is a deterministic permutation") {
    std::vector<int> a(50), b;
    std::iota(a.begin(), a.end(), 0);
    b = a;
    Rng r1(17), r2(17);
    shuffle_in_place(std::span<int>(a), r1);
    shuffle_in_place(std::span<int>(b), r2);
    CHECK(a == b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}
