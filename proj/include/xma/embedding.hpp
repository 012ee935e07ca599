#pragma once

#include <cstddef>
#include <vector>

namespace xma {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Rows are feature vectors; every module
// that passes batches around uses this shape.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    Vec row_vec(std::size_t r) const {
        return Vec(row(r), row(r) + cols);
    }
    void set_row(std::size_t r, const Vec& v) {
        for (std::size_t c = 0; c < cols; ++c) at(r, c) = v[c];
    }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

// Throws NumericError if any entry is non-finite.
void require_finite(const Vec& v, const char* what);
void require_finite(const Matrix& m, const char* what);

double norm2(const Vec& v);
double dot(const Vec& a, const Vec& b);

// Scales v to unit L2 norm. Throws DegenerateInputError on zero norm.
Vec unit_normalize(const Vec& v);

// Euclidean distance. Throws ShapeError on dimension mismatch.
double l2_distance(const Vec& a, const Vec& b);

// Cosine of the angle between a and b, clamped to [-1, 1].
// Throws DegenerateInputError if either norm is zero.
double cosine_similarity(const Vec& a, const Vec& b);

} // namespace xma
