#include "xma/kernels.hpp"

#include <cmath>

#include <omp.h>

#include "xma/errors.hpp"
#include "xma/threads.hpp"

namespace xma::kernels {

namespace {

void check_cols(const Matrix& a, const Matrix& b, const char* what) {
    if (a.cols != b.cols) throw ShapeError(std::string(what) + ": column mismatch");
}

// Shared scalar bodies: both variants call these so the arithmetic (and its
// rounding) is identical element for element.

inline double l2_row(const double* x, const double* y, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double t = x[i] - y[i];
        s += t * t;
    }
    return std::sqrt(s);
}

inline double dot_row(const double* x, const double* y, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += x[i] * y[i];
    return s;
}

inline void normalize_row(const double* x, double* out, std::size_t d,
                          double zero_eps, bool* zero_flag) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += x[i] * x[i];
    const double n = std::sqrt(s);
    if (n <= zero_eps) {
        for (std::size_t i = 0; i < d; ++i) out[i] = x[i];
        *zero_flag = true;
        return;
    }
    for (std::size_t i = 0; i < d; ++i) out[i] = x[i] / n;
}

} // namespace

namespace serial {

Matrix pairwise_l2(const Matrix& a, const Matrix& b) {
    check_cols(a, b, "pairwise_l2");
    Matrix out(a.rows, b.rows);
    for (std::size_t j = 0; j < a.rows; ++j)
        for (std::size_t k = 0; k < b.rows; ++k)
            out.at(j, k) = l2_row(a.row(j), b.row(k), a.cols);
    return out;
}

Matrix pairwise_dot(const Matrix& a, const Matrix& b) {
    check_cols(a, b, "pairwise_dot");
    Matrix out(a.rows, b.rows);
    for (std::size_t j = 0; j < a.rows; ++j)
        for (std::size_t k = 0; k < b.rows; ++k)
            out.at(j, k) = dot_row(a.row(j), b.row(k), a.cols);
    return out;
}

Matrix normalize_rows(const Matrix& m, double zero_eps, bool* had_zero_row) {
    Matrix out(m.rows, m.cols);
    bool zero = false;
    for (std::size_t r = 0; r < m.rows; ++r)
        normalize_row(m.row(r), out.row(r), m.cols, zero_eps, &zero);
    if (had_zero_row) *had_zero_row = zero;
    return out;
}

} // namespace serial

namespace parallel {

Matrix pairwise_l2(const Matrix& a, const Matrix& b) {
    check_cols(a, b, "pairwise_l2");
    Matrix out(a.rows, b.rows);
    const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(a.rows); ++j)
        for (std::size_t k = 0; k < b.rows; ++k)
            out.at(j, k) = l2_row(a.row(j), b.row(k), a.cols);
    return out;
}

Matrix pairwise_dot(const Matrix& a, const Matrix& b) {
    check_cols(a, b, "pairwise_dot");
    Matrix out(a.rows, b.rows);
    const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(a.rows); ++j)
        for (std::size_t k = 0; k < b.rows; ++k)
            out.at(j, k) = dot_row(a.row(j), b.row(k), a.cols);
    return out;
}

Matrix normalize_rows(const Matrix& m, double zero_eps, bool* had_zero_row) {
    Matrix out(m.rows, m.cols);
    const int nt = thread_count();
    bool zero = false;
    // bool write is idempotent (only ever set true), so unsynchronized is fine.
#pragma omp parallel for num_threads(nt) schedule(static) shared(zero)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(m.rows); ++r)
        normalize_row(m.row(r), out.row(r), m.cols, zero_eps, &zero);
    if (had_zero_row) *had_zero_row = zero;
    return out;
}

} // namespace parallel

Matrix pairwise_l2(const Matrix& a, const Matrix& b) {
    return thread_count() > 1 ? parallel::pairwise_l2(a, b) : serial::pairwise_l2(a, b);
}

Matrix pairwise_dot(const Matrix& a, const Matrix& b) {
    return thread_count() > 1 ? parallel::pairwise_dot(a, b) : serial::pairwise_dot(a, b);
}

Matrix normalize_rows(const Matrix& m, double zero_eps, bool* had_zero_row) {
    return thread_count() > 1 ? parallel::normalize_rows(m, zero_eps, had_zero_row)
                              : serial::normalize_rows(m, zero_eps, had_zero_row);
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int nt = thread_count();
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
#pragma omp parallel for num_threads(nt) schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        fn(static_cast<std::size_t>(i));
}

} // namespace xma::kernels
