#pragma once

#include <filesystem>

#include "xma/encoders.hpp"

namespace xma {

// Checkpoint files hold a sequence of role-tagged networks. The visual
// checkpoint carries the frozen pair (f_V, G); the audio checkpoint carries
// the trunk and head of f_A.
enum class NetRole : std::uint8_t {
    Visual = 0,
    Generator = 1,
    AudioTrunk = 2,
    AudioHead = 3,
};

struct VisualCheckpoint {
    Mlp visual;
    Mlp generator;
};

struct AudioCheckpoint {
    AudioEncoder audio;
};

void save_visual_checkpoint(const VisualCheckpoint& ckpt,
                            const std::filesystem::path& path);
VisualCheckpoint load_visual_checkpoint(const std::filesystem::path& path);

void save_audio_checkpoint(const AudioCheckpoint& ckpt,
                           const std::filesystem::path& path);
AudioCheckpoint load_audio_checkpoint(const std::filesystem::path& path);

} // namespace xma
