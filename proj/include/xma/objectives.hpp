#pragma once

#include "xma/embedding.hpp"

namespace xma {

enum class DistanceKind { L2, Cosine };

enum class LossVariantTag { L2Only, NceCosine, TotalL2Nce };

struct LossVariant {
    LossVariantTag tag = LossVariantTag::TotalL2Nce;
    double temperature = 1.0; // NceCosine only

    static LossVariant l2_only() { return {LossVariantTag::L2Only, 1.0}; }
    static LossVariant nce_cosine(double tau = 1.0) { return {LossVariantTag::NceCosine, tau}; }
    static LossVariant total() { return {LossVariantTag::TotalL2Nce, 1.0}; }
};

struct LossResult {
    double value = 0.0;
    Matrix grad_audio;  // d(value)/d(raw audio rows)
    Matrix grad_visual; // d(value)/d(raw visual rows)
};

// One contrastive term for anchor row j of `anchors` against all rows of
// `candidates`:  d(a_j,b_j)/tau + log sum_k exp(-d(a_j,b_k)/tau),
// evaluated with max subtraction in the log-sum. For L2 the anchor/candidate
// rows are expected raw; for Cosine they must be unit-normalized.
double infonce_term(std::size_t anchor_index, const Matrix& anchors,
                    const Matrix& candidates, DistanceKind distance,
                    double temperature = 1.0);

// Mean over anchors of infonce_term under L2 distance. Rows must be
// unit-normalized already.
double loss_audio_centric(const Matrix& batch_audio, const Matrix& batch_visual);

// Full training objective with analytic gradients wrt the raw (pre-
// normalization) inputs. TotalL2Nce and NceCosine normalize rows internally
// and backpropagate through the normalization; L2Only acts on raw features.
LossResult loss_total(const Matrix& batch_audio, const Matrix& batch_visual,
                      const LossVariant& variant);

} // namespace xma
