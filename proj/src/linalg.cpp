#include "xma/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "xma/errors.hpp"

namespace xma {

EigenDecomposition symmetric_eigen(const Matrix& a) {
    if (a.rows != a.cols) throw ShapeError("eigendecomposition needs a square matrix");
    const std::size_t n = a.rows;
    Matrix m = a;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double mip = m.at(i, p), miq = m.at(i, q);
                    m.at(i, p) = c * mip - s * miq;
                    m.at(i, q) = s * mip + c * miq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double mpi = m.at(p, i), mqi = m.at(q, i);
                    m.at(p, i) = c * mpi - s * mqi;
                    m.at(q, i) = s * mpi + c * mqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = c * vip - s * viq;
                    v.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    EigenDecomposition out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = m.at(i, i);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (out.values[x] != out.values[y]) return out.values[x] < out.values[y];
        return x < y;
    });
    Vec sorted_vals(n);
    Matrix sorted_vecs(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        sorted_vals[i] = out.values[order[i]];
        for (std::size_t r = 0; r < n; ++r) sorted_vecs.at(r, i) = v.at(r, order[i]);
    }
    out.values = std::move(sorted_vals);
    out.vectors = std::move(sorted_vecs);
    return out;
}

Vec column_mean(const Matrix& m) {
    if (m.rows == 0) throw ShapeError("mean of an empty matrix");
    Vec mu(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) mu[c] += row[c];
    }
    for (double& v : mu) v /= double(m.rows);
    return mu;
}

Matrix covariance(const Matrix& m, double ridge) {
    const Vec mu = column_mean(m);
    Matrix cov(m.cols, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (std::size_t i = 0; i < m.cols; ++i) {
            const double di = row[i] - mu[i];
            for (std::size_t j = i; j < m.cols; ++j)
                cov.at(i, j) += di * (row[j] - mu[j]);
        }
    }
    for (std::size_t i = 0; i < m.cols; ++i)
        for (std::size_t j = i; j < m.cols; ++j) {
            cov.at(i, j) /= double(m.rows);
            cov.at(j, i) = cov.at(i, j);
        }
    for (std::size_t i = 0; i < m.cols; ++i) cov.at(i, i) += ridge;
    return cov;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j)
                out.at(i, j) += aik * b.at(k, j);
        }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out.at(c, r) = m.at(r, c);
    return out;
}

} // namespace xma
