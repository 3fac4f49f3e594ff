#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "landmatch/rng.hpp"

namespace lm = landmatch;

TEST_CASE("splitmix64 reproduces the published seed-zero outputs") {
    lm::SplitMix64 sm{0};
    CHECK(sm.next() == 0xe220a8397b1dcdafULL);
    CHECK(sm.next() == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("seeded xoshiro output is frozen across platforms") {
    lm::Xoshiro256 rng(42);
    CHECK(rng.next() == 0x15780b2e0c2ec716ULL);
    CHECK(rng.next() == 0x6104d9866d113a7eULL);
    CHECK(rng.next() == 0xae17533239e499a1ULL);
}

TEST_CASE("same seed gives the same sequence, different seeds differ") {
    lm::Xoshiro256 a(123), b(123), c(124);
    bool all_equal = true, any_differ = false;
    for (int i = 0; i < 32; ++i) {
        const auto va = a.next();
        all_equal = all_equal && va == b.next();
        any_differ = any_differ || va != c.next();
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("stream splitting is stable and matches derive_seed") {
    CHECK(lm::Xoshiro256::derive_seed(7, 3) == 0xb4a0472e578069aeULL);
    lm::Xoshiro256 direct = lm::Xoshiro256::stream(7, 3);
    CHECK(direct.next() == 0xd5e34f03e8e1df24ULL);

    lm::Xoshiro256 via_seed(lm::Xoshiro256::derive_seed(7, 3));
    lm::Xoshiro256 again = lm::Xoshiro256::stream(7, 3);
    for (int i = 0; i < 16; ++i) CHECK(via_seed.next() == again.next());

    lm::Xoshiro256 other = lm::Xoshiro256::stream(7, 4);
    lm::Xoshiro256 base = lm::Xoshiro256::stream(7, 3);
    bool differ = false;
    for (int i = 0; i < 16; ++i) differ = differ || other.next() != base.next();
    CHECK(differ);
}

TEST_CASE("uniform draws cover [0,1) with the right moments") {
    lm::Xoshiro256 rng(80);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 0.005);
    CHECK(std::abs(var - 1.0 / 12.0) < 0.005);

    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-3.0, 5.0);
        CHECK(u >= -3.0);
        CHECK(u < 5.0);
    }
}

TEST_CASE("below is range-correct and roughly uniform") {
    lm::Xoshiro256 rng(81);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto v = rng.below(7);
        REQUIRE(v < 7);
        counts[static_cast<std::size_t>(v)] += 1;
    }
    for (int c : counts) CHECK(std::abs(c - n / 7) < 500);
    CHECK(rng.below(1) == 0);
}

TEST_CASE("normal draws have standard moments") {
    lm::Xoshiro256 rng(82);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.02);

    lm::Xoshiro256 shifted(82);
    double s = 0;
    for (int i = 0; i < 10000; ++i) s += shifted.normal(10.0, 0.5);
    CHECK(std::abs(s / 10000 - 10.0) < 0.05);
}
