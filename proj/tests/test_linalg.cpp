#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "xma/linalg.hpp"
#include "xma/rng.hpp"

using namespace xma;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m.at(r, c);
    return out;
}

Matrix random_symmetric(std::size_t n, Rng& rng) {
    Matrix a = test::random_matrix(n, n, rng);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < r; ++c) {
            const double s = 0.5 * (a.at(r, c) + a.at(c, r));
            a.at(r, c) = s;
            a.at(c, r) = s;
        }
    return a;
}

} // namespace

TEST_CASE("symmetric_eigen matches Eigen eigenvalues on random matrices") {
    Rng rng(31);
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 16u}) {
        const Matrix a = random_symmetric(n, rng);
        const EigenDecomposition d = symmetric_eigen(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
        REQUIRE(d.values.size() == n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(d.values[i] ==
                  doctest::Approx(es.eigenvalues()(Eigen::Index(i))).epsilon(1e-9));
        if (n > 1)
            for (std::size_t i = 0; i + 1 < n; ++i)
                CHECK(d.values[i] <= d.values[i + 1]);
    }
}

TEST_CASE("symmetric_eigen reconstructs A = V diag(w) V^T") {
    Rng rng(32);
    const Matrix a = random_symmetric(7, rng);
    const EigenDecomposition d = symmetric_eigen(a);
    Matrix scaled = d.vectors;
    for (std::size_t r = 0; r < scaled.rows; ++r)
        for (std::size_t c = 0; c < scaled.cols; ++c) scaled.at(r, c) *= d.values[c];
    const Matrix back = matmul(scaled, transpose(d.vectors));
    CHECK(test::max_abs_diff(back, a) < 1e-9);
}

TEST_CASE("symmetric_eigen eigenvectors are orthonormal") {
    Rng rng(33);
    const Matrix a = random_symmetric(6, rng);
    const EigenDecomposition d = symmetric_eigen(a);
    const Matrix gram = matmul(transpose(d.vectors), d.vectors);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 6; ++c)
            CHECK(gram.at(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("column_mean and covariance match direct computation") {
    Rng rng(34);
    const Matrix m = test::random_matrix(40, 5, rng);
    const Vec mu = column_mean(m);
    for (std::size_t c = 0; c < 5; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < 40; ++r) acc += m.at(r, c);
        CHECK(mu[c] == doctest::Approx(acc / 40.0).epsilon(1e-12));
    }

    const Matrix cov = covariance(m);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < 40; ++r)
                acc += (m.at(r, i) - mu[i]) * (m.at(r, j) - mu[j]);
            CHECK(cov.at(i, j) == doctest::Approx(acc / 40.0).epsilon(1e-10));
        }

    const Matrix ridged = covariance(m, 0.25);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(ridged.at(i, i) == doctest::Approx(cov.at(i, i) + 0.25).epsilon(1e-12));
}

TEST_CASE("matmul and transpose agree with Eigen") {
    Rng rng(35);
    const Matrix a = test::random_matrix(4, 7, rng);
    const Matrix b = test::random_matrix(7, 3, rng);
    const Matrix c = matmul(a, b);
    const Eigen::MatrixXd ref = to_eigen(a) * to_eigen(b);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(c.at(r, j) ==
                  doctest::Approx(ref(Eigen::Index(r), Eigen::Index(j))).epsilon(1e-12));

    const Matrix t = transpose(a);
    REQUIRE(t.rows == 7);
    REQUIRE(t.cols == 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t j = 0; j < 7; ++j) CHECK(t.at(j, r) == a.at(r, j));
}
