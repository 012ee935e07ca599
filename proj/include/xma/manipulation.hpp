#pragma once

#include <vector>

#include "xma/data_synthesis.hpp"
#include "xma/embedding.hpp"
#include "xma/encoders.hpp"

namespace xma {

struct AudioClip {
    Matrix samples;    // T x D_A
    double gain = 1.0; // cumulative volume bookkeeping
};

// Exact element-wise scaling; gain must be positive.
AudioClip scale_volume(const AudioClip& clip, double gain);

// Element-wise weighted sum; shapes must agree, at least one clip.
// The mix starts fresh bookkeeping (gain 1).
AudioClip mix_clips(const std::vector<AudioClip>& clips, const Vec& weights);

// Exact convex combination lambda*z_a + (1-lambda)*z_b, lambda in [0, 1].
Vec interpolate_latent(const Vec& z_a, const Vec& z_b, double lambda);

// z_inv + lambda * (z_a1 - z_a2), exact.
Vec edit_direction(const Vec& z_inv, const Vec& z_a1, const Vec& z_a2, double lambda);

struct SaliencyResult {
    Vec weights; // length T, nonnegative; sums to 1 unless degenerate
    bool degenerate = false;
};

// Grad-CAM analog over the pooling stage: objective ||G(0, f_A(clip))||^2,
// per-timestep weight = rectified mean over channels of gradient x
// activation at the pre-pooling embeddings. All-zero weights come back
// uniform with the degenerate flag set. Requires a frozen generator.
SaliencyResult temporal_saliency(const AudioEncoder& enc, const Mlp& g,
                                 const AudioClip& clip);

// Fraction of the given clips whose mean saliency over event timesteps
// exceeds the mean over the rest (clips with all-event masks are skipped).
double saliency_event_concentration(const AudioEncoder& enc, const Mlp& g,
                                    const Dataset& dataset,
                                    const std::vector<std::size_t>& clip_indices);

} // namespace xma
