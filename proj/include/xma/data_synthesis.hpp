#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "xma/embedding.hpp"
#include "xma/rng.hpp"

namespace xma {

// Generative knobs. Everything downstream (projections, prototypes, splits)
// is rederivable from these values, which is why they travel in the file
// header verbatim.
struct SynthConfig {
    std::uint32_t classes = 8;
    std::uint32_t clips_per_class = 64;
    std::uint32_t timesteps = 20;
    std::uint32_t visual_dim = 64;
    std::uint32_t audio_dim = 24;
    std::uint32_t latent_dim = 16;
    double p_event = 0.3;
    double sigma = 0.1;
    double distractor = 0.1; // amplitude of non-event filler noise
    std::uint64_t seed = 1;
};

struct DatasetHeader {
    std::uint32_t classes = 0;
    std::uint32_t clips = 0;
    std::uint32_t timesteps = 0;
    std::uint32_t visual_dim = 0;
    std::uint32_t audio_dim = 0;
    std::uint32_t latent_dim = 0;
    double p_event = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

struct ClipRecord {
    std::uint32_t id = 0;
    std::uint32_t label = 0;
    std::vector<std::uint8_t> event_mask; // timesteps entries, 0 or 1
    Matrix visual;                        // timesteps x visual_dim
    Matrix audio;                         // timesteps x audio_dim
};

struct Dataset {
    DatasetHeader header;
    std::vector<ClipRecord> clips;
};

// Scale of the per-clip latent variation around the class prototype.
inline constexpr double kPrototypeJitter = 0.1;

// Derivation stream ids; clip i uses kStreamClipBase + i.
inline constexpr std::uint64_t kStreamVisualProjection = 1;
inline constexpr std::uint64_t kStreamAudioProjection = 2;
inline constexpr std::uint64_t kStreamPrototypes = 3;
inline constexpr std::uint64_t kStreamClipBase = 16;

// rows x cols matrix with orthonormal columns (modified Gram-Schmidt of a
// Gaussian draw). Requires rows >= cols.
Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng);

Matrix visual_projection(const DatasetHeader& header);
Matrix audio_projection(const DatasetHeader& header);
std::vector<Vec> class_prototypes(const DatasetHeader& header);

// Values are quantized to f32 at generation time so the in-memory dataset
// and a save/load round trip are bit-identical.
Dataset synth_dataset(const SynthConfig& config);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// 70/15/15 per class, in clip order within each class.
struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};
SplitIndices split_dataset(const DatasetHeader& header);

} // namespace xma
