#pragma once

#include <cstdint>
#include <vector>

#include "xma/data_synthesis.hpp"
#include "xma/embedding.hpp"

namespace xma {

enum class PairSource : std::uint8_t { SelectedTop1 = 0, MidFrame = 1 };

// Per-timestep feature rows of both modalities in a shared space.
struct TimeAlignedFeatures {
    Matrix q_visual; // T x m
    Matrix q_audio;  // T x m
};

struct MomentAnnotation {
    std::uint32_t clip_id = 0;
    std::vector<std::size_t> indices; // sorted by descending score
    Vec scores;                       // one per timestep; empty for MID_FRAME
    bool low_confidence = false;
};

inline constexpr double kDefaultLowConfidence = 0.1;

// Backprojects both observation streams into the shared latent space of the
// synthesizer and unit-normalizes each timestep row. Rows with vanishing
// norm are left zero so they score 0 instead of throwing.
TimeAlignedFeatures aligned_features(const ClipRecord& clip, const Matrix& p_visual,
                                     const Matrix& p_audio);

// score[t] = q_visual[t] . q_audio[t]
Vec correlation_scores(const TimeAlignedFeatures& f);

// k highest-scoring timesteps, ties broken toward the earlier timestep.
MomentAnnotation top_k_moments(const Vec& scores, std::size_t k);

std::vector<MomentAnnotation> annotate_dataset(
    const Dataset& dataset, PairSource mode,
    double low_confidence_threshold = kDefaultLowConfidence);

// The timestep a given annotation pairs with the clip's audio.
std::size_t paired_timestep(const MomentAnnotation& annotation);

// Fraction of clips whose top-1 selected timestep is a true event timestep.
double selection_accuracy(const Dataset& dataset);

} // namespace xma
