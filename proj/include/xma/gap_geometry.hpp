#pragma once

#include <cstdint>
#include <vector>

#include "xma/embedding.hpp"

namespace xma {

// All geometry runs on unit-normalized embeddings; inputs here are raw
// encoder outputs and are normalized internally.
struct GapReport {
    Vec magnitudes; // ||g_i|| per pair
    double magnitude_mean = 0.0;
    double magnitude_std = 0.0; // population
    Vec orthogonality_visual;   // cos(z - mean z, mean gap) per pair
    Vec orthogonality_audio;
    Vec centering_visual; // per-dimension mean after removing the gap axis
    Vec centering_audio;
    double alignment = 0.0; // mean paired cosine
    std::size_t pairs = 0;
    bool degenerate_mean_gap = false; // orthogonality/centering undefined
};

// gaps[i] = unit(z_visual[i]) - unit(z_audio[i])
Matrix modality_gaps(const Matrix& z_visual, const Matrix& z_audio);

struct MagnitudeStats {
    Vec norms;
    double mean = 0.0;
    double std_dev = 0.0;
};
MagnitudeStats magnitude_stats(const Matrix& gaps);

// Cosine between each centered feature row and the mean gap vector.
// Sets *degenerate if the mean gap has (near-)zero norm; the samples are
// then returned empty rather than silently zeroed.
Vec orthogonality_samples(const Matrix& z_side_normalized, const Matrix& gaps,
                          bool* degenerate);

// Per-dimension mean of the features with their mean-gap component removed:
// E[z - (z . g')g'] with g' the unit mean gap.
Vec centering_values(const Matrix& z_side_normalized, const Matrix& gaps,
                     bool* degenerate);

// Mean cosine similarity of matched pairs.
double alignment_score(const Matrix& z_visual, const Matrix& z_audio);

GapReport gap_report(const Matrix& z_visual, const Matrix& z_audio);

// Deterministic 2-D PCA projection of both embedding clouds (shared axes,
// first nonzero loading of each axis made positive).
struct Projection2D {
    Matrix visual_xy;
    Matrix audio_xy;
};
Projection2D project_2d(const Matrix& z_visual, const Matrix& z_audio);

} // namespace xma
