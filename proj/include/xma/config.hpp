#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xma/data_synthesis.hpp"
#include "xma/encoders.hpp"

namespace xma {

// Flat key=value experiment configuration. Unknown keys are rejected;
// omitted keys take the documented defaults, and the full resolved set is
// echoed into every report.
struct ExperimentConfig {
    SynthConfig dataset;
    double selection_threshold = kDefaultLowConfidence;
    std::size_t visual_hidden = 48;
    std::size_t embed_dim = 32;
    std::size_t noise_dim = 8;
    std::size_t generator_hidden = 64;
    std::size_t pretrain_epochs = 30;
    std::size_t audio_hidden = 32;
    std::size_t audio_trunk_dim = 32;
    TrainConfig train;
    std::size_t eval_is_splits = 4;
    std::size_t eval_classifier_epochs = 300;
    double eval_classifier_lr = 0.5;
    std::uint64_t seed = 1;

    ModelDims dims() const;
    PretrainConfig pretrain() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical (key, value) listing of every setting, defaults included.
std::vector<std::pair<std::string, std::string>> echo_config(
    const ExperimentConfig& config);

std::string loss_variant_name(const LossVariant& variant);
std::string pair_source_name(PairSource source);

} // namespace xma
