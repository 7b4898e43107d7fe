#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "affsched/rng.hpp"

using affsched::Rng;

TEST_CASE("same seed reproduces the stream exactly") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and streams diverge") {
    Rng a(42), b(43), c(42, 1);
    int equal_ab = 0, equal_ac = 0;
    for (int i = 0; i < 256; ++i) {
        const auto x = a.next_u64();
        if (x == b.next_u64()) ++equal_ab;
        if (x == c.next_u64()) ++equal_ac;
    }
    CHECK(equal_ab == 0);
    CHECK(equal_ac == 0);
}

TEST_CASE("doubles live in [0,1) and fill the range") {
    Rng r(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = r.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
}

TEST_CASE("below is in range and roughly uniform") {
    Rng r(11);
    std::vector<long> counts(10, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto x = r.below(10);
        REQUIRE(x < 10);
        counts[static_cast<size_t>(x)] += 1;
    }
    for (long c : counts) {
        CHECK(c > n / 10 - 5 * std::sqrt(n / 10.0));
        CHECK(c < n / 10 + 5 * std::sqrt(n / 10.0));
    }
    CHECK(r.below(1) == 0);
    CHECK(r.below(0) == 0);
}

TEST_CASE("exponential has the right mean") {
    Rng r(13);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += r.exponential(2.0);
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("split streams are independent of parent consumption") {
    Rng parent(99);
    Rng child1 = parent.split(5);
    parent.next_u64();
    Rng child2 = Rng(99).split(5);
    for (int i = 0; i < 100; ++i) CHECK(child1.next_u64() == child2.next_u64());
}

TEST_CASE("distinct split tags give distinct streams") {
    Rng parent(3);
    Rng a = parent.split(0);
    Rng b = parent.split(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 100; ++i) {
        seen.insert(a.next_u64());
        seen.insert(b.next_u64());
    }
    CHECK(seen.size() == 200);
}
