#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "xma/embedding.hpp"
#include "xma/rng.hpp"

namespace xma::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                            double scale = 1.0) {
    Matrix m(rows, cols);
    for (auto& x : m.data) x = scale * rng.normal();
    return m;
}

inline Vec random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
    Vec v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = std::abs(a.data[i] - b.data[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

// Fresh per-process scratch directory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("xma_test_" + tag + "_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace xma::test
