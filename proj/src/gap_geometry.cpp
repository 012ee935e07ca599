#include "xma/gap_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "xma/errors.hpp"
#include "xma/kernels.hpp"
#include "xma/linalg.hpp"

namespace xma {
namespace {

constexpr double kDegenerateNorm = 1e-12;

Matrix normalized_or_throw(const Matrix& z, const char* what) {
    bool had_zero = false;
    Matrix out = kernels::normalize_rows(z, kDegenerateNorm, &had_zero);
    if (had_zero)
        throw DegenerateInputError(std::string(what) + " has a zero-norm row");
    return out;
}

void check_paired(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError("paired embedding sets disagree in shape");
    if (a.rows == 0) throw ShapeError("no pairs");
}

Vec mean_row(const Matrix& m) { return column_mean(m); }

} // namespace

Matrix modality_gaps(const Matrix& z_visual, const Matrix& z_audio) {
    check_paired(z_visual, z_audio);
    const Matrix v = normalized_or_throw(z_visual, "visual embeddings");
    const Matrix a = normalized_or_throw(z_audio, "audio embeddings");
    Matrix gaps(v.rows, v.cols);
    for (std::size_t i = 0; i < gaps.data.size(); ++i)
        gaps.data[i] = v.data[i] - a.data[i];
    return gaps;
}

MagnitudeStats magnitude_stats(const Matrix& gaps) {
    if (gaps.rows == 0) throw ShapeError("no gap rows");
    MagnitudeStats stats;
    stats.norms.resize(gaps.rows);
    for (std::size_t r = 0; r < gaps.rows; ++r) {
        double acc = 0.0;
        const double* row = gaps.row(r);
        for (std::size_t c = 0; c < gaps.cols; ++c) acc += row[c] * row[c];
        stats.norms[r] = std::sqrt(acc);
    }
    double mean = 0.0, mean_sq = 0.0;
    for (double n : stats.norms) {
        mean += n;
        mean_sq += n * n;
    }
    mean /= double(stats.norms.size());
    mean_sq /= double(stats.norms.size());
    stats.mean = mean;
    stats.std_dev = std::sqrt(std::max(0.0, mean_sq - mean * mean));
    return stats;
}

Vec orthogonality_samples(const Matrix& z_side_normalized, const Matrix& gaps,
                          bool* degenerate) {
    check_paired(z_side_normalized, gaps);
    const Vec mean_gap = mean_row(gaps);
    const double gap_norm = norm2(mean_gap);
    if (gap_norm < kDegenerateNorm) {
        if (degenerate) *degenerate = true;
        return {};
    }
    const Vec side_mean = mean_row(z_side_normalized);
    Vec samples(z_side_normalized.rows);
    for (std::size_t r = 0; r < z_side_normalized.rows; ++r) {
        Vec centered(z_side_normalized.cols);
        double norm_sq = 0.0;
        double dot_g = 0.0;
        for (std::size_t c = 0; c < centered.size(); ++c) {
            centered[c] = z_side_normalized.at(r, c) - side_mean[c];
            norm_sq += centered[c] * centered[c];
            dot_g += centered[c] * mean_gap[c];
        }
        const double norm = std::sqrt(norm_sq);
        samples[r] = norm < 1e-15
                         ? 0.0
                         : std::clamp(dot_g / (norm * gap_norm), -1.0, 1.0);
    }
    return samples;
}

Vec centering_values(const Matrix& z_side_normalized, const Matrix& gaps,
                     bool* degenerate) {
    check_paired(z_side_normalized, gaps);
    const Vec mean_gap = mean_row(gaps);
    const double gap_norm = norm2(mean_gap);
    if (gap_norm < kDegenerateNorm) {
        if (degenerate) *degenerate = true;
        return {};
    }
    Vec unit_gap(mean_gap.size());
    for (std::size_t c = 0; c < unit_gap.size(); ++c)
        unit_gap[c] = mean_gap[c] / gap_norm;
    const Vec side_mean = mean_row(z_side_normalized);
    double along = 0.0;
    for (std::size_t c = 0; c < side_mean.size(); ++c)
        along += side_mean[c] * unit_gap[c];
    Vec values(side_mean.size());
    for (std::size_t c = 0; c < values.size(); ++c)
        values[c] = side_mean[c] - along * unit_gap[c];
    return values;
}

double alignment_score(const Matrix& z_visual, const Matrix& z_audio) {
    check_paired(z_visual, z_audio);
    const Matrix v = normalized_or_throw(z_visual, "visual embeddings");
    const Matrix a = normalized_or_throw(z_audio, "audio embeddings");
    double total = 0.0;
    for (std::size_t r = 0; r < v.rows; ++r) {
        double d = 0.0;
        for (std::size_t c = 0; c < v.cols; ++c) d += v.at(r, c) * a.at(r, c);
        total += std::clamp(d, -1.0, 1.0);
    }
    return total / double(v.rows);
}

GapReport gap_report(const Matrix& z_visual, const Matrix& z_audio) {
    check_paired(z_visual, z_audio);
    const Matrix v = normalized_or_throw(z_visual, "visual embeddings");
    const Matrix a = normalized_or_throw(z_audio, "audio embeddings");
    Matrix gaps(v.rows, v.cols);
    for (std::size_t i = 0; i < gaps.data.size(); ++i)
        gaps.data[i] = v.data[i] - a.data[i];

    GapReport report;
    const MagnitudeStats stats = magnitude_stats(gaps);
    report.magnitudes = stats.norms;
    report.magnitude_mean = stats.mean;
    report.magnitude_std = stats.std_dev;
    report.pairs = v.rows;

    bool degenerate = false;
    report.orthogonality_visual = orthogonality_samples(v, gaps, &degenerate);
    report.orthogonality_audio = orthogonality_samples(a, gaps, &degenerate);
    report.centering_visual = centering_values(v, gaps, &degenerate);
    report.centering_audio = centering_values(a, gaps, &degenerate);
    report.degenerate_mean_gap = degenerate;
    report.alignment = alignment_score(z_visual, z_audio);
    return report;
}

Projection2D project_2d(const Matrix& z_visual, const Matrix& z_audio) {
    check_paired(z_visual, z_audio);
    if (z_visual.cols < 2) throw ShapeError("2-D projection needs at least 2 dims");
    const Matrix v = normalized_or_throw(z_visual, "visual embeddings");
    const Matrix a = normalized_or_throw(z_audio, "audio embeddings");

    Matrix stacked(v.rows + a.rows, v.cols);
    for (std::size_t r = 0; r < v.rows; ++r) stacked.set_row(r, v.row_vec(r));
    for (std::size_t r = 0; r < a.rows; ++r)
        stacked.set_row(v.rows + r, a.row_vec(r));

    const Vec mu = column_mean(stacked);
    for (std::size_t r = 0; r < stacked.rows; ++r)
        for (std::size_t c = 0; c < stacked.cols; ++c) stacked.at(r, c) -= mu[c];

    const Matrix cov = covariance(stacked);
    const EigenDecomposition eig = symmetric_eigen(cov);
    // Top-2 eigenvectors; sign fixed so the first nonzero loading is positive.
    Matrix axes(stacked.cols, 2);
    for (std::size_t k = 0; k < 2; ++k) {
        const std::size_t col = eig.values.size() - 1 - k;
        double sign = 1.0;
        for (std::size_t c = 0; c < stacked.cols; ++c) {
            const double x = eig.vectors.at(c, col);
            if (std::abs(x) > 1e-12) {
                sign = x < 0.0 ? -1.0 : 1.0;
                break;
            }
        }
        for (std::size_t c = 0; c < stacked.cols; ++c)
            axes.at(c, k) = sign * eig.vectors.at(c, col);
    }

    const Matrix xy = matmul(stacked, axes);
    Projection2D proj;
    proj.visual_xy = Matrix(v.rows, 2);
    proj.audio_xy = Matrix(a.rows, 2);
    for (std::size_t r = 0; r < v.rows; ++r) {
        proj.visual_xy.at(r, 0) = xy.at(r, 0);
        proj.visual_xy.at(r, 1) = xy.at(r, 1);
    }
    for (std::size_t r = 0; r < a.rows; ++r) {
        proj.audio_xy.at(r, 0) = xy.at(v.rows + r, 0);
        proj.audio_xy.at(r, 1) = xy.at(v.rows + r, 1);
    }
    return proj;
}

} // namespace xma
