#pragma once

#include "xma/embedding.hpp"

namespace xma {

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues ascending; eigenvectors[.,i] is the column for eigenvalue i.
struct EigenDecomposition {
    Vec values;
    Matrix vectors;
};
EigenDecomposition symmetric_eigen(const Matrix& a);

Vec column_mean(const Matrix& m);

// Population covariance (divide by row count), optionally with a ridge term
// added to the diagonal.
Matrix covariance(const Matrix& m, double ridge = 0.0);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

} // namespace xma
