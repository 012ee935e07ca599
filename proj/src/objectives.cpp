#include "xma/objectives.hpp"

#include <cmath>

#include "xma/errors.hpp"
#include "xma/kernels.hpp"

namespace xma {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ShapeError(std::string(what) + ": shape mismatch");
    }
    if (a.rows == 0) throw ShapeError(std::string(what) + ": empty batch");
}

// log sum_k exp(x_k) with max subtraction; iteration order is ascending k.
double logsumexp(const double* x, std::size_t n, std::size_t stride) {
    double m = x[0];
    for (std::size_t k = 1; k < n; ++k) m = std::max(m, x[k * stride]);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::exp(x[k * stride] - m);
    return m + std::log(s);
}

double distance_between(const double* a, const double* b, std::size_t d,
                        DistanceKind kind, double tau) {
    if (kind == DistanceKind::L2) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double t = a[i] - b[i];
            s += t * t;
        }
        return std::sqrt(s) / tau;
    }
    double c = 0.0;
    for (std::size_t i = 0; i < d; ++i) c += a[i] * b[i];
    return (1.0 - c) / tau;
}

// Backpropagates d(loss)/d(normalized rows) to d(loss)/d(raw rows):
// for a row a with n = ||a||, ahat = a/n,
//   d/da = (g - (g . ahat) ahat) / n.
Matrix through_normalization(const Matrix& raw, const Matrix& normalized,
                             const Matrix& grad_normalized) {
    Matrix out(raw.rows, raw.cols);
    for (std::size_t r = 0; r < raw.rows; ++r) {
        double nsq = 0.0;
        for (std::size_t i = 0; i < raw.cols; ++i) nsq += raw.at(r, i) * raw.at(r, i);
        const double n = std::sqrt(nsq);
        double gdot = 0.0;
        for (std::size_t i = 0; i < raw.cols; ++i) {
            gdot += grad_normalized.at(r, i) * normalized.at(r, i);
        }
        for (std::size_t i = 0; i < raw.cols; ++i) {
            out.at(r, i) = (grad_normalized.at(r, i) - gdot * normalized.at(r, i)) / n;
        }
    }
    return out;
}

// Softmax coefficient matrix for the symmetric objective. For every entry,
//   C[j][k] = (2*delta_jk - P[j][k] - Q[j][k]) / (2B)
// with P the row softmax and Q the column softmax of -D.
Matrix symmetric_coefficients(const Matrix& dist) {
    const std::size_t b = dist.rows;
    Matrix coeff(b, b);
    // Row softmax (audio-centric terms).
    for (std::size_t j = 0; j < b; ++j) {
        double m = -dist.at(j, 0);
        for (std::size_t k = 1; k < b; ++k) m = std::max(m, -dist.at(j, k));
        double z = 0.0;
        for (std::size_t k = 0; k < b; ++k) z += std::exp(-dist.at(j, k) - m);
        for (std::size_t k = 0; k < b; ++k) {
            coeff.at(j, k) = -std::exp(-dist.at(j, k) - m) / z;
        }
    }
    // Column softmax (visual-centric terms).
    for (std::size_t k = 0; k < b; ++k) {
        double m = -dist.at(0, k);
        for (std::size_t j = 1; j < b; ++j) m = std::max(m, -dist.at(j, k));
        double z = 0.0;
        for (std::size_t j = 0; j < b; ++j) z += std::exp(-dist.at(j, k) - m);
        for (std::size_t j = 0; j < b; ++j) {
            coeff.at(j, k) -= std::exp(-dist.at(j, k) - m) / z;
        }
    }
    const double scale = 1.0 / (2.0 * static_cast<double>(b));
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t k = 0; k < b; ++k) {
            const double diag = (j == k) ? 2.0 : 0.0;
            coeff.at(j, k) = (diag + coeff.at(j, k)) * scale;
        }
    }
    return coeff;
}

// Symmetric objective value from a distance matrix:
//   (1/2B) sum_j [ (D_jj + lse_k(-D_jk)) + (D_jj + lse_k(-D_kj)) ].
double symmetric_value(const Matrix& dist) {
    const std::size_t b = dist.rows;
    double total = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        double neg_row = 0.0, neg_col = 0.0;
        {
            double m = -dist.at(j, 0);
            for (std::size_t k = 1; k < b; ++k) m = std::max(m, -dist.at(j, k));
            double z = 0.0;
            for (std::size_t k = 0; k < b; ++k) z += std::exp(-dist.at(j, k) - m);
            neg_row = m + std::log(z);
        }
        {
            double m = -dist.at(0, j);
            for (std::size_t k = 1; k < b; ++k) m = std::max(m, -dist.at(k, j));
            double z = 0.0;
            for (std::size_t k = 0; k < b; ++k) z += std::exp(-dist.at(k, j) - m);
            neg_col = m + std::log(z);
        }
        const double term_audio = dist.at(j, j) + neg_row;
        const double term_visual = dist.at(j, j) + neg_col;
        total += term_audio + term_visual;
    }
    return total / (2.0 * static_cast<double>(dist.rows));
}

LossResult total_l2nce(const Matrix& audio, const Matrix& visual) {
    const std::size_t b = audio.rows;
    const std::size_t d = audio.cols;
    bool zero_row = false;
    const Matrix ahat = kernels::normalize_rows(audio, 0.0, &zero_row);
    const Matrix vhat = kernels::normalize_rows(visual, 0.0, &zero_row);
    if (zero_row) throw DegenerateInputError("loss_total: zero-norm feature row");

    const Matrix dist = kernels::pairwise_l2(ahat, vhat);
    const Matrix coeff = symmetric_coefficients(dist);

    Matrix ga(b, d), gv(b, d);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t k = 0; k < b; ++k) {
            const double djk = dist.at(j, k);
            if (djk == 0.0) continue; // subgradient 0 at coincident pairs
            const double w = coeff.at(j, k) / djk;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = ahat.at(j, i) - vhat.at(k, i);
                ga.at(j, i) += w * diff;
                gv.at(k, i) -= w * diff;
            }
        }
    }
    LossResult res;
    res.value = symmetric_value(dist);
    res.grad_audio = through_normalization(audio, ahat, ga);
    res.grad_visual = through_normalization(visual, vhat, gv);
    return res;
}

LossResult nce_cosine(const Matrix& audio, const Matrix& visual, double tau) {
    const std::size_t b = audio.rows;
    const std::size_t d = audio.cols;
    bool zero_row = false;
    const Matrix ahat = kernels::normalize_rows(audio, 0.0, &zero_row);
    const Matrix vhat = kernels::normalize_rows(visual, 0.0, &zero_row);
    if (zero_row) throw DegenerateInputError("loss_total: zero-norm feature row");

    const Matrix dots = kernels::pairwise_dot(ahat, vhat);
    Matrix dist(b, b);
    for (std::size_t j = 0; j < b; ++j)
        for (std::size_t k = 0; k < b; ++k)
            dist.at(j, k) = (1.0 - dots.at(j, k)) / tau;

    const Matrix coeff = symmetric_coefficients(dist);

    Matrix ga(b, d), gv(b, d);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t k = 0; k < b; ++k) {
            const double w = -coeff.at(j, k) / tau; // d(dist)/d(dot) = -1/tau
            for (std::size_t i = 0; i < d; ++i) {
                ga.at(j, i) += w * vhat.at(k, i);
                gv.at(k, i) += w * ahat.at(j, i);
            }
        }
    }
    LossResult res;
    res.value = symmetric_value(dist);
    res.grad_audio = through_normalization(audio, ahat, ga);
    res.grad_visual = through_normalization(visual, vhat, gv);
    return res;
}

LossResult l2_only(const Matrix& audio, const Matrix& visual) {
    const std::size_t b = audio.rows;
    const std::size_t d = audio.cols;
    LossResult res;
    res.grad_audio = Matrix(b, d);
    res.grad_visual = Matrix(b, d);
    double total = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double t = visual.at(j, i) - audio.at(j, i);
            s += t * t;
        }
        const double dj = std::sqrt(s);
        total += dj;
        if (dj == 0.0) continue;
        const double w = 1.0 / (static_cast<double>(b) * dj);
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = audio.at(j, i) - visual.at(j, i);
            res.grad_audio.at(j, i) = w * diff;
            res.grad_visual.at(j, i) = -w * diff;
        }
    }
    res.value = total / static_cast<double>(b);
    return res;
}

} // namespace

double infonce_term(std::size_t anchor_index, const Matrix& anchors,
                    const Matrix& candidates, DistanceKind distance,
                    double temperature) {
    check_same_shape(anchors, candidates, "infonce_term");
    if (anchor_index >= anchors.rows) {
        throw ShapeError("infonce_term: anchor index out of range");
    }
    if (temperature <= 0.0) throw ShapeError("infonce_term: temperature must be positive");

    const std::size_t n = candidates.rows;
    std::vector<double> neg(n);
    for (std::size_t k = 0; k < n; ++k) {
        neg[k] = -distance_between(anchors.row(anchor_index), candidates.row(k),
                                   anchors.cols, distance, temperature);
    }
    const double pos = -neg[anchor_index];
    return pos + logsumexp(neg.data(), n, 1);
}

double loss_audio_centric(const Matrix& batch_audio, const Matrix& batch_visual) {
    check_same_shape(batch_audio, batch_visual, "loss_audio_centric");
    double total = 0.0;
    for (std::size_t j = 0; j < batch_audio.rows; ++j) {
        total += infonce_term(j, batch_audio, batch_visual, DistanceKind::L2);
    }
    return total / static_cast<double>(batch_audio.rows);
}

LossResult loss_total(const Matrix& batch_audio, const Matrix& batch_visual,
                      const LossVariant& variant) {
    check_same_shape(batch_audio, batch_visual, "loss_total");
    require_finite(batch_audio, "loss_total audio");
    require_finite(batch_visual, "loss_total visual");
    if (variant.temperature <= 0.0) {
        throw ShapeError("loss_total: temperature must be positive");
    }
    switch (variant.tag) {
        case LossVariantTag::TotalL2Nce:
            return total_l2nce(batch_audio, batch_visual);
        case LossVariantTag::NceCosine:
            return nce_cosine(batch_audio, batch_visual, variant.temperature);
        case LossVariantTag::L2Only:
            return l2_only(batch_audio, batch_visual);
    }
    throw ShapeError("loss_total: unknown variant");
}

} // namespace xma
