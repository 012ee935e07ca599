#include "xma/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xma/errors.hpp"

namespace xma {

void require_finite(const Vec& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(what) + ": non-finite entry");
        }
    }
}

void require_finite(const Matrix& m, const char* what) {
    for (double x : m.data) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(what) + ": non-finite entry");
        }
    }
}

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vec unit_normalize(const Vec& v) {
    if (v.empty()) throw ShapeError("unit_normalize: empty vector");
    const double n = norm2(v);
    if (n == 0.0) throw DegenerateInputError("unit_normalize: zero-norm input");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

double l2_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("l2_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double cosine_similarity(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_similarity: dimension mismatch");
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 || nb == 0.0) {
        throw DegenerateInputError("cosine_similarity: zero-norm input");
    }
    const double c = dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

} // namespace xma
