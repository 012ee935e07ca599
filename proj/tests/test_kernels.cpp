#include <atomic>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "xma/embedding.hpp"
#include "xma/errors.hpp"
#include "xma/kernels.hpp"
#include "xma/rng.hpp"
#include "xma/threads.hpp"

using namespace xma;

namespace {

struct ThreadGuard {
    explicit ThreadGuard(int n) { set_thread_count(n); }
    ~ThreadGuard() { set_thread_count(0); }
};

} // namespace

TEST_CASE("pairwise_l2 serial and parallel are bit-identical") {
    Rng rng(41);
    for (int n : {1, 2, 4, 8}) {
        ThreadGuard guard(n);
        for (int i = 0; i < 5; ++i) {
            const Matrix a = test::random_matrix(1 + rng.below(33), 5, rng);
            const Matrix b = test::random_matrix(1 + rng.below(17), 5, rng);
            const Matrix s = kernels::serial::pairwise_l2(a, b);
            const Matrix p = kernels::parallel::pairwise_l2(a, b);
            CHECK(s == p);
            CHECK(kernels::pairwise_l2(a, b) == s);
        }
    }
}

TEST_CASE("pairwise_dot serial and parallel are bit-identical") {
    Rng rng(42);
    ThreadGuard guard(4);
    const Matrix a = test::random_matrix(23, 9, rng);
    const Matrix b = test::random_matrix(31, 9, rng);
    const Matrix s = kernels::serial::pairwise_dot(a, b);
    CHECK(s == kernels::parallel::pairwise_dot(a, b));
    CHECK(s == kernels::pairwise_dot(a, b));
    for (std::size_t j = 0; j < a.rows; ++j)
        for (std::size_t k = 0; k < b.rows; ++k)
            CHECK(s.at(j, k) ==
                  doctest::Approx(dot(a.row_vec(j), b.row_vec(k))).epsilon(1e-12));
}

TEST_CASE("pairwise_l2 values match the scalar distance") {
    Rng rng(43);
    const Matrix a = test::random_matrix(6, 4, rng);
    const Matrix b = test::random_matrix(7, 4, rng);
    const Matrix d = kernels::pairwise_l2(a, b);
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t k = 0; k < 7; ++k)
            CHECK(d.at(j, k) ==
                  doctest::Approx(l2_distance(a.row_vec(j), b.row_vec(k)))
                      .epsilon(1e-12));
}

TEST_CASE("pairwise kernels reject mismatched dimensions") {
    const Matrix a(2, 3);
    const Matrix b(2, 4);
    CHECK_THROWS_AS(kernels::pairwise_l2(a, b), ShapeError);
    CHECK_THROWS_AS(kernels::pairwise_dot(a, b), ShapeError);
}

TEST_CASE("normalize_rows serial and parallel are bit-identical") {
    Rng rng(44);
    ThreadGuard guard(3);
    Matrix m = test::random_matrix(19, 6, rng);
    m.set_row(4, Vec(6, 0.0));
    bool zero_s = false, zero_p = false;
    const Matrix s = kernels::serial::normalize_rows(m, 0.0, &zero_s);
    const Matrix p = kernels::parallel::normalize_rows(m, 0.0, &zero_p);
    CHECK(s == p);
    CHECK(zero_s);
    CHECK(zero_p);
    for (std::size_t c = 0; c < 6; ++c) CHECK(s.at(4, c) == 0.0);
    for (std::size_t r = 0; r < s.rows; ++r) {
        if (r == 4) continue;
        CHECK(norm2(s.row_vec(r)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("normalize_rows without zero rows leaves the flag untouched") {
    Rng rng(45);
    Matrix m = test::random_matrix(8, 3, rng);
    bool had_zero = false;
    kernels::normalize_rows(m, 0.0, &had_zero);
    CHECK_FALSE(had_zero);
}

TEST_CASE("for_each_index covers every index exactly once") {
    ThreadGuard guard(4);
    const std::size_t n = 1000;
    std::vector<std::atomic<int>> hits(n);
    for (auto& h : hits) h.store(0);
    kernels::for_each_index(n, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (std::size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
}

TEST_CASE("thread_count override round-trips") {
    set_thread_count(2);
    CHECK(thread_count() == 2);
    set_thread_count(0);
    CHECK(thread_count() >= 1);
}
