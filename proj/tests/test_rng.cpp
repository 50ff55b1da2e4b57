#include "survss/rng.hpp"

#include <doctest.h>

#include <cmath>

using survss::Stream;

TEST_CASE("streams are reproducible and keyed by seed, tag and index") {
    Stream a(7, 1, 3), b(7, 1, 3), c(7, 1, 4), d(7, 2, 3), e(8, 1, 3);
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
    CHECK(x != e.next_u64());
}

TEST_CASE("uniform draws stay inside the open unit interval with the right moments") {
    Stream s(42, 9);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
    CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.01));
}

TEST_CASE("normal draws have zero mean and unit variance") {
    Stream s(1, 2);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
}
