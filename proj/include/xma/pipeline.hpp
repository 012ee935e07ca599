#pragma once

#include <vector>

#include "xma/config.hpp"
#include "xma/data_synthesis.hpp"
#include "xma/encoders.hpp"
#include "xma/evaluation.hpp"
#include "xma/gap_geometry.hpp"
#include "xma/report.hpp"

namespace xma {

struct TrainedModels {
    Mlp visual;
    Mlp generator;
    AudioEncoder audio;
    TrainingLog pretrain_log;
    TrainingLog train_log;
};

// Pretraining plus alignment training under a single config.
TrainedModels train_models(const Dataset& dataset, const ExperimentConfig& config);

// Class-level audio-to-visual R@k on the test split under the configured
// pair source and duration.
double test_class_recall(const Dataset& dataset, const Mlp& f_v,
                         const AudioEncoder& audio, const ExperimentConfig& config,
                         std::size_t k = 1);

// Paired-instance audio-to-visual R@k on the test split.
double test_instance_recall(const Dataset& dataset, const Mlp& f_v,
                            const AudioEncoder& audio,
                            const ExperimentConfig& config, std::size_t k = 1);

// Retrieval metrics, classifier baselines, Fréchet distance, and the score
// analog for one trained model on the test split.
EvalReport evaluate_model(const Dataset& dataset, const Mlp& f_v, const Mlp& g,
                          const AudioEncoder& audio, const ExperimentConfig& config);

struct GapArtifacts {
    GapReport report;
    Projection2D projection;
    std::vector<std::uint32_t> labels; // one per test pair
};
GapArtifacts gap_artifacts(const Dataset& dataset, const Mlp& f_v,
                           const AudioEncoder& audio, const ExperimentConfig& config);

// One-axis-at-a-time grid around the TOTAL / selected-pair / full-duration
// default: the three loss variants, mid-frame pairing, and shortened
// durations (half-length analog 10, minimal 2).
std::vector<ExperimentConfig> ablation_grid_configs(const ExperimentConfig& base);

// Synthesizes the dataset, pretrains once, then trains and scores every
// grid row.
std::vector<AblationRow> run_ablation_grid(const ExperimentConfig& base);

} // namespace xma
