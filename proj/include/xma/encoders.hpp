#pragma once

#include <cstdint>
#include <vector>

#include "xma/data_synthesis.hpp"
#include "xma/mlp.hpp"
#include "xma/objectives.hpp"
#include "xma/pair_selection.hpp"

namespace xma {

// Per-timestep trunk shared across the clip, mean pooling, then one linear
// head into the shared embedding space.
struct AudioEncoder {
    Mlp trunk;
    Mlp head;
};

struct ModelDims {
    std::size_t visual_dim = 64;
    std::size_t visual_hidden = 48;
    std::size_t embed_dim = 32;
    std::size_t noise_dim = 8;
    std::size_t generator_hidden = 64;
    std::size_t audio_dim = 24;
    std::size_t audio_hidden = 32;
    std::size_t audio_trunk_dim = 32;
};

// Parameter-initialization and shuffle stream ids (see Rng::stream).
inline constexpr std::uint64_t kStreamVisualInit = 101;
inline constexpr std::uint64_t kStreamGeneratorInit = 102;
inline constexpr std::uint64_t kStreamAudioTrunkInit = 103;
inline constexpr std::uint64_t kStreamAudioHeadInit = 104;
inline constexpr std::uint64_t kStreamPretrainShuffle = 1000; // + epoch
inline constexpr std::uint64_t kStreamPretrainNoise = 2000;   // + epoch
inline constexpr std::uint64_t kStreamTrainShuffle = 3000;    // + epoch
inline constexpr std::uint64_t kStreamEvalNoise = 5000;

Mlp make_visual_encoder(const ModelDims& dims, std::uint64_t seed);
Mlp make_generator(const ModelDims& dims, std::uint64_t seed);
AudioEncoder make_audio_encoder(const ModelDims& dims, std::uint64_t seed);

Vec forward_visual(const Mlp& f_v, const Vec& frame);

// Applies the trunk per timestep, mean-pools, then the head. Pooling sums
// each channel in ascending value order, which makes the result exactly
// invariant to timestep permutations.
Vec forward_audio(const AudioEncoder& enc, const Matrix& clip_audio);

struct AudioTrace {
    std::vector<ForwardTrace> trunk;
    Vec pooled;
    ForwardTrace head;
};
Vec forward_audio_trace(const AudioEncoder& enc, const Matrix& clip_audio,
                        AudioTrace& trace);
void backward_audio(const AudioEncoder& enc, const AudioTrace& trace,
                    const Vec& d_out, MlpGrads& trunk_grads, MlpGrads& head_grads);

// Conditioning canonicalization applied inside generate: unit-normalizes
// z_cond, passing (near-)zero vectors through unchanged so a zero latent is
// a valid "no conditioning" input for inversion's zero start.
Vec generator_conditioning(const Vec& z_cond);

// Vector-Jacobian product of generator_conditioning at z_cond applied to
// d_cond; the zero branch uses the identity.
Vec generator_conditioning_backward(const Vec& z_cond, const Vec& d_cond);

Vec generate(const Mlp& g, const Vec& z_noise, const Vec& z_cond);

// First row of the duration-sized window centered on the chosen timestep,
// clamped at the clip boundaries.
std::size_t window_start(std::size_t chosen, std::size_t duration,
                         std::size_t timesteps);
Matrix audio_window(const ClipRecord& clip, std::size_t chosen, std::size_t duration);

struct EpochEntry {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    // Validation R@1 for alignment training; validation reconstruction
    // error for pretraining.
    double val_metric = 0.0;
    double wall_ms = 0.0;
};

struct TrainingLog {
    std::vector<EpochEntry> epochs;
    std::size_t best_epoch = 0;      // 1-based; 0 when no epochs ran
    std::size_t early_stop_epoch = 0; // 1-based epoch that triggered the stop
    bool stopped_early = false;
    double final_val_metric = 0.0;
};

struct PretrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    double weight_decay = 1e-5;
};

struct PretrainResult {
    Mlp visual;
    Mlp generator;
    TrainingLog log;
};

// Joint reconstruction training of f_V and G on train-split frames with
// fresh noise per step. Afterwards the mean embedding of the train-split
// paired frames is folded into the encoder's final bias (with the matching
// compensation in G's first-layer bias), and both networks are frozen.
PretrainResult pretrain_visual(const Dataset& dataset, const ModelDims& dims,
                               const PretrainConfig& config, std::uint64_t seed);

struct TrainConfig {
    std::size_t batch_size = 64;
    double lr = 1e-3;
    double weight_decay = 1e-5;
    std::size_t epochs = 50;
    std::size_t patience = 10;
    LossVariant variant = LossVariant::total();
    PairSource pair_source = PairSource::SelectedTop1;
    std::size_t duration_timesteps = 20;
};

struct TrainResult {
    AudioEncoder audio;
    TrainingLog log;
};

// Optimizes the configured loss over (audio window, frozen visual target)
// batches, early-stopping on validation class-level R@1; returns the
// best-validation parameters.
TrainResult train_audio_encoder(const Dataset& dataset, const Mlp& f_v,
                                const ModelDims& dims, const TrainConfig& config,
                                std::uint64_t seed);

// Embedding tables for a subset of clips. Rows are raw encoder outputs.
Matrix visual_embeddings(const Mlp& f_v, const Dataset& dataset,
                         const std::vector<std::size_t>& clip_indices,
                         const std::vector<MomentAnnotation>& annotations);
Matrix audio_embeddings(const AudioEncoder& enc, const Dataset& dataset,
                        const std::vector<std::size_t>& clip_indices,
                        const std::vector<MomentAnnotation>& annotations,
                        std::size_t duration);
std::vector<std::uint32_t> labels_of(const Dataset& dataset,
                                     const std::vector<std::size_t>& clip_indices);

inline constexpr std::size_t kInversionSteps = 400;
inline constexpr double kInversionStepSize = 0.1;

struct InversionResult {
    Vec z_noise;
    Vec z_cond;
    double residual; // squared reconstruction error at the returned latents
    std::size_t accepted_steps = 0;
};

// Gradient descent on ||G(z_noise, z_cond) - target||^2 from zero
// initialization; backtracking halves the step on any increase (max 20
// halvings per step) and accepted steps grow it by 1.2x. noise_dim says
// where the generator input splits into (z_noise, z_cond).
InversionResult invert_generator(const Mlp& g, const Vec& target,
                                 std::size_t noise_dim,
                                 std::size_t steps = kInversionSteps,
                                 double step_size = kInversionStepSize);

} // namespace xma
