#include <doctest.h>

#include <cmath>

#include "corekit/numerics.hpp"

using namespace corekit;

TEST_CASE("rng reproduces the frozen reference sequence") {
    // First outputs for seeds 0 and 42, cross-checked against an independent
    // implementation of the same generator.
    const std::uint64_t seed0[5] = {0x9170fbcd52e121fbULL, 0x2f37c5e420baab96ULL,
                                    0x35003ae0b23c53a9ULL, 0x06885c962950e453ULL,
                                    0x6bd74d485bf118caULL};
    const std::uint64_t seed42[5] = {0x797b0c1885b72c42ULL, 0x72d0fc844950d71dULL,
                                     0x5441fbd73ace3a73ULL, 0x619d00164873ca3fULL,
                                     0x64eabf0eb11c0418ULL};
    SeededRng a(0), b(42);
    for (int i = 0; i < 5; ++i) {
        CHECK(a.next_u64() == seed0[i]);
        CHECK(b.next_u64() == seed42[i]);
    }
    SeededRng c(42);
    CHECK(c.next_double() == doctest::Approx(0.47453380201997375).epsilon(1e-16));
}

TEST_CASE("rademacher entries and determinism") {
    SeededRng rng(0);
    const Vector z = rademacher(rng, 4);
    REQUIRE(z.size() == 4);
    for (double v : z) CHECK((v == 1.0 || v == -1.0));

    SeededRng r1(0), r2(0);
    CHECK(rademacher(r1, 4) == rademacher(r2, 4));

    CHECK_THROWS_AS(rademacher(rng, 0), DimensionError);
}

TEST_CASE("rademacher empirical coordinate means vanish") {
    // 100k draws; 0.02 is > 6 standard errors of a +-1 coin.
    SeededRng rng(123);
    const std::size_t draws = 100000, d = 4;
    Vector mean(d, 0.0);
    for (std::size_t s = 0; s < draws; ++s) {
        const Vector z = rademacher(rng, d);
        for (std::size_t j = 0; j < d; ++j) mean[j] += z[j];
    }
    for (std::size_t j = 0; j < d; ++j)
        CHECK(std::abs(mean[j] / static_cast<double>(draws)) < 0.02);
}

TEST_CASE("deterministic_sum basics") {
    const std::vector<Vector> xs{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(deterministic_sum(xs, 2) == Vector{4.0, 6.0});
    CHECK(deterministic_sum({}, 2) == Vector{0.0, 0.0});

    SeededRng rng(9);
    std::vector<Vector> random_xs(64, Vector(5));
    for (auto& x : random_xs)
        for (auto& v : x) v = rng.next_gaussian();
    CHECK(deterministic_sum(random_xs, 5) == deterministic_sum(random_xs, 5));

    const std::vector<Vector> bad{{1.0, 2.0}, {3.0}};
    CHECK_THROWS_AS(deterministic_sum(bad, 2), DimensionError);
}

TEST_CASE("matrix shape and symmetry checks") {
    CHECK_THROWS_AS(Matrix(2, 2, Vector{1.0, 2.0, 3.0}), DimensionError);
    CHECK_THROWS_AS(Matrix::symmetric(2, Vector{1.0, 2.0, 3.0, 4.0}), InvalidInputError);
    const Matrix m = Matrix::symmetric(2, Vector{1.0, 2.0, 2.0, 4.0});
    CHECK(m(0, 1) == 2.0);
    CHECK(m.apply({1.0, 1.0}) == Vector{3.0, 6.0});
}

TEST_CASE("finite checks at boundaries") {
    CHECK_THROWS_AS(require_finite(Vector{1.0, std::nan("")}, "probe"), InvalidInputError);
    CHECK_NOTHROW(require_finite(Vector{0.0, -2.5}, "probe"));
}

TEST_CASE("next_below is deterministic and in range") {
    SeededRng a(5), b(5);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_below(7);
        CHECK(x == b.next_below(7));
        CHECK(x < 7);
    }
    CHECK_THROWS_AS(a.next_below(0), InvalidInputError);
}
