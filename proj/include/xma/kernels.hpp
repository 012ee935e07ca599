#pragma once

#include <functional>

#include "xma/embedding.hpp"

namespace xma::kernels {

// Data-parallel batch kernels. Each has a serial reference and an OpenMP
// variant; the two are bit-identical for any thread count because every
// output element is produced by one fixed-order scalar computation. The
// unqualified entry points dispatch on xma::thread_count().

namespace serial {
Matrix pairwise_l2(const Matrix& a, const Matrix& b);
Matrix pairwise_dot(const Matrix& a, const Matrix& b);
Matrix normalize_rows(const Matrix& m, double zero_eps, bool* had_zero_row = nullptr);
} // namespace serial

namespace parallel {
Matrix pairwise_l2(const Matrix& a, const Matrix& b);
Matrix pairwise_dot(const Matrix& a, const Matrix& b);
Matrix normalize_rows(const Matrix& m, double zero_eps, bool* had_zero_row = nullptr);
} // namespace parallel

// dist[j][k] = ||a_j - b_k||_2. Throws ShapeError unless a.cols == b.cols.
Matrix pairwise_l2(const Matrix& a, const Matrix& b);

// dot[j][k] = a_j . b_k.
Matrix pairwise_dot(const Matrix& a, const Matrix& b);

// Row-wise unit normalization. Rows with norm <= zero_eps are copied
// unchanged and reported through had_zero_row; callers that forbid them
// check the flag.
Matrix normalize_rows(const Matrix& m, double zero_eps = 0.0, bool* had_zero_row = nullptr);

// Runs fn(i) for i in [0, n) across the worker pool. fn must only write
// state owned by index i.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace xma::kernels
