#include <catch2/catch_amalgamated.hpp>

#include "dbnd/rng.hpp"

using dbnd::RngStream;

TEST_CASE("splitmix64 matches the reference sequence", "[rng]") {
    // First outputs of the reference implementation for states 0 and 42.
    std::uint64_t s = 0;
    CHECK(dbnd::splitmix64_next(s) == 0xE220A8397B1DCDAFull);
    CHECK(dbnd::splitmix64_next(s) == 0x6E789E6AA1B965F4ull);
    CHECK(dbnd::splitmix64_next(s) == 0x06C45D188009454Full);

    s = 42;
    CHECK(dbnd::splitmix64_next(s) == 0xBDD732262FEB6E95ull);
    CHECK(dbnd::splitmix64_next(s) == 0x28EFE333B266F103ull);
}

TEST_CASE("derive_seed gives distinct deterministic sub-seeds", "[rng]") {
    const auto a = dbnd::derive_seed(7, 0);
    const auto b = dbnd::derive_seed(7, 1);
    CHECK(a != b);
    CHECK(a == dbnd::derive_seed(7, 0));
    CHECK(dbnd::derive_seed(8, 0) != a);
}

TEST_CASE("uniform draws live in [0,1) and repeat under a seed", "[rng]") {
    RngStream a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.uniform());
    }
}

TEST_CASE("gaussian moments are near standard normal", "[rng]") {
    RngStream rng(99);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum2 += g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("bernoulli honors degenerate probabilities", "[rng]") {
    RngStream rng(5);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(rng.bernoulli(0.0));
        CHECK(rng.bernoulli(1.0));
    }
    CHECK_THROWS_AS(rng.bernoulli(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(rng.bernoulli(1.1), std::invalid_argument);
}
