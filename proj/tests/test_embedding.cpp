#include <cmath>
#include <limits>

#include "doctest.h"
#include "support.hpp"
#include "xma/embedding.hpp"
#include "xma/errors.hpp"
#include "xma/rng.hpp"

using namespace xma;

TEST_CASE("unit_normalize on the 3-4-5 triangle") {
    const Vec v = unit_normalize({3.0, 4.0});
    CHECK(v[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("unit_normalize preserves axis vectors") {
    const Vec v = unit_normalize({0.0, 0.0, 5.0});
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unit_normalize rejects zero norm") {
    CHECK_THROWS_AS(unit_normalize({0.0, 0.0}), DegenerateInputError);
}

TEST_CASE("unit_normalize yields unit norm on random inputs") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Vec v = test::random_vec(1 + std::size_t(rng.below(32)), rng, 3.0);
        if (norm2(v) == 0.0) continue;
        CHECK(norm2(unit_normalize(v)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("l2_distance basics") {
    CHECK(l2_distance({1.0, 0.0}, {0.0, 1.0}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const Vec a{0.5, -2.0, 7.0};
    CHECK(l2_distance(a, a) == 0.0);
    CHECK_THROWS_AS(l2_distance({1.0}, {1.0, 2.0}), ShapeError);
}

TEST_CASE("l2_distance matches a direct-summation oracle") {
    Rng rng(21);
    const Vec a = test::random_vec(8, rng);
    const Vec b = test::random_vec(8, rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(l2_distance(a, b) == doctest::Approx(std::sqrt(acc)).epsilon(1e-14));
}

TEST_CASE("l2_distance triangle inequality on random triples") {
    Rng rng(22);
    for (int i = 0; i < 500; ++i) {
        const Vec a = test::random_vec(6, rng);
        const Vec b = test::random_vec(6, rng);
        const Vec c = test::random_vec(6, rng);
        CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-10);
    }
}

TEST_CASE("cosine_similarity basics") {
    CHECK(cosine_similarity({1.0, 0.0}, {2.0, 0.0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1.0, 0.0}, {0.0, 3.0}) == doctest::Approx(0.0));
    CHECK(cosine_similarity({1.0, 1.0}, {-1.0, -1.0}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(cosine_similarity({0.0, 0.0}, {1.0, 0.0}),
                    DegenerateInputError);
}

TEST_CASE("cosine stays within [-1, 1] for near-parallel inputs") {
    const Vec a{1e-8, 1.0, 1e8};
    CHECK(cosine_similarity(a, a) <= 1.0);
    CHECK(cosine_similarity(a, a) >= -1.0);
}

TEST_CASE("cosine equals 1 - chord^2 / 2 on unit vectors") {
    Rng rng(23);
    for (int i = 0; i < 300; ++i) {
        const Vec a = unit_normalize(test::random_vec(10, rng));
        const Vec b = unit_normalize(test::random_vec(10, rng));
        const double d = l2_distance(a, b);
        CHECK(cosine_similarity(a, b) ==
              doctest::Approx(1.0 - d * d / 2.0).epsilon(1e-10));
    }
}

TEST_CASE("require_finite flags NaN and infinity") {
    Vec v{1.0, 2.0};
    CHECK_NOTHROW(require_finite(v, "v"));
    v[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(require_finite(v, "v"), NumericError);
    Matrix m(2, 2);
    m.at(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(require_finite(m, "m"), NumericError);
}

TEST_CASE("matrix row accessors agree with flat storage") {
    Matrix m(3, 4);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = double(i);
    CHECK(m.at(1, 2) == 6.0);
    const Vec r = m.row_vec(2);
    CHECK(r[0] == 8.0);
    Matrix n = m;
    CHECK(n == m);
    n.at(0, 0) = -1.0;
    CHECK_FALSE(n == m);
}
