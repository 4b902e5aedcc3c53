#include "reachguard/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace reachguard;

TEST_CASE("rng streams are deterministic per (seed, id)") {
    Rng a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng nearby stream ids decorrelate") {
    Rng a(42, 0), b(42, 1), c(43, 0);
    int agree_ab = 0, agree_ac = 0;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t x = a.next_u64();
        if (x == b.next_u64()) ++agree_ab;
        if (x == c.next_u64()) ++agree_ac;
    }
    CHECK(agree_ab == 0);
    CHECK(agree_ac == 0);
}

TEST_CASE("uniform stays inside its interval") {
    Rng rng(1, 2);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform(-2.5, 3.5);
        CHECK(v >= -2.5);
        CHECK(v < 3.5);
    }
}

TEST_CASE("uniform_index covers its range without escaping it") {
    Rng rng(3, 4);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = rng.uniform_index(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("normal moments are near standard") {
    Rng rng(5, 6);
    const int n = 40000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}
