#include <doctest.h>

#include <cmath>
#include <set>

#include "gasp/rng.hpp"

using namespace gasp;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and is roughly centered") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform_int respects bounds and covers values") {
    Rng rng(11);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v = rng.uniform_int(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.uniform_int(0) == 0);
    CHECK(rng.uniform_int(1) == 0);
}

TEST_CASE("derive is label-stable and does not advance the parent") {
    const Rng parent(99);
    Rng a = parent.derive("alpha");
    Rng b = parent.derive("alpha");
    Rng c = parent.derive("beta");
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() == b.next_u64());
    CHECK(parent.state() == 99);
    Rng a2 = parent.derive("alpha");
    Rng c2 = parent.derive("beta");
    CHECK(c.state() == c2.state());
    CHECK(a2.next_u64() != c2.next_u64());
}

TEST_CASE("normal draws have sane moments") {
    Rng rng(3);
    double sum = 0.0, sq = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("fnv1a64 matches the reference constants") {
    // Known FNV-1a test vectors.
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}
