#include "xma/checkpoint.hpp"

#include <cstring>

#include "xma/errors.hpp"
#include "xma/io.hpp"

namespace xma {
namespace {

constexpr char kCheckpointMagic[4] = {'X', 'M', 'A', 'P'};
constexpr std::uint16_t kCheckpointVersion = 1;

void write_net(std::ostream& os, NetRole role, const Mlp& net) {
    io::put<std::uint8_t>(os, std::uint8_t(role));
    io::put<std::uint8_t>(os, std::uint8_t(net.spec.activation));
    io::put<std::uint8_t>(os, std::uint8_t(net.spec.input_kind));
    io::put<std::uint8_t>(os, net.activate_final ? 1 : 0);
    io::put<std::uint8_t>(os, net.frozen ? 1 : 0);
    io::put<std::uint32_t>(os, std::uint32_t(net.spec.widths.size()));
    for (std::size_t w : net.spec.widths) io::put<std::uint32_t>(os, std::uint32_t(w));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (double v : net.weights[l].data) io::put<double>(os, v);
        for (double v : net.biases[l]) io::put<double>(os, v);
    }
}

Mlp read_net(std::istream& is, NetRole expected_role) {
    const auto role = io::get<std::uint8_t>(is, "net role");
    if (role != std::uint8_t(expected_role))
        throw IoError("unexpected network role in checkpoint");
    Mlp net;
    const auto activation = io::get<std::uint8_t>(is, "activation");
    if (activation > std::uint8_t(Activation::Tanh))
        throw IoError("unknown activation in checkpoint");
    net.spec.activation = Activation(activation);
    const auto input_kind = io::get<std::uint8_t>(is, "input kind");
    if (input_kind > std::uint8_t(InputKind::TemporalSequence))
        throw IoError("unknown input kind in checkpoint");
    net.spec.input_kind = InputKind(input_kind);
    net.activate_final = io::get<std::uint8_t>(is, "activate_final") != 0;
    net.frozen = io::get<std::uint8_t>(is, "frozen flag") != 0;
    const auto n_widths = io::get<std::uint32_t>(is, "width count");
    if (n_widths < 2 || n_widths > 64)
        throw IoError("implausible layer structure in checkpoint");
    net.spec.widths.resize(n_widths);
    for (auto& w : net.spec.widths) {
        w = io::get<std::uint32_t>(is, "layer width");
        if (w == 0 || w > (1u << 20)) throw IoError("implausible layer width");
    }
    for (std::size_t l = 0; l + 1 < net.spec.widths.size(); ++l) {
        Matrix w(net.spec.widths[l + 1], net.spec.widths[l]);
        for (double& v : w.data) v = io::get<double>(is, "weights");
        net.weights.push_back(std::move(w));
        Vec b(net.spec.widths[l + 1]);
        for (double& v : b) v = io::get<double>(is, "biases");
        net.biases.push_back(std::move(b));
    }
    return net;
}

void write_checkpoint(const std::filesystem::path& path,
                      const std::vector<std::pair<NetRole, const Mlp*>>& nets) {
    io::atomic_write(path, [&](std::ostream& os) {
        io::put_bytes(os, kCheckpointMagic, 4);
        io::put<std::uint16_t>(os, kCheckpointVersion);
        io::put<std::uint32_t>(os, std::uint32_t(nets.size()));
        for (const auto& [role, net] : nets) write_net(os, role, *net);
    });
}

std::ifstream open_checkpoint(const std::filesystem::path& path,
                              std::uint32_t expected_nets) {
    std::ifstream is = io::open_input(path);
    char magic[4];
    io::get_bytes(is, magic, 4, "magic");
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw BadMagicError("not a checkpoint file: " + path.string());
    const auto version = io::get<std::uint16_t>(is, "version");
    if (version != kCheckpointVersion)
        throw VersionMismatchError("unsupported checkpoint version " +
                                   std::to_string(version));
    const auto count = io::get<std::uint32_t>(is, "net count");
    if (count != expected_nets)
        throw IoError("checkpoint holds " + std::to_string(count) +
                      " networks, expected " + std::to_string(expected_nets));
    return is;
}

} // namespace

void save_visual_checkpoint(const VisualCheckpoint& ckpt,
                            const std::filesystem::path& path) {
    write_checkpoint(path, {{NetRole::Visual, &ckpt.visual},
                            {NetRole::Generator, &ckpt.generator}});
}

VisualCheckpoint load_visual_checkpoint(const std::filesystem::path& path) {
    std::ifstream is = open_checkpoint(path, 2);
    VisualCheckpoint ckpt;
    ckpt.visual = read_net(is, NetRole::Visual);
    ckpt.generator = read_net(is, NetRole::Generator);
    io::expect_eof(is, "checkpoint");
    return ckpt;
}

void save_audio_checkpoint(const AudioCheckpoint& ckpt,
                           const std::filesystem::path& path) {
    write_checkpoint(path, {{NetRole::AudioTrunk, &ckpt.audio.trunk},
                            {NetRole::AudioHead, &ckpt.audio.head}});
}

AudioCheckpoint load_audio_checkpoint(const std::filesystem::path& path) {
    std::ifstream is = open_checkpoint(path, 2);
    AudioCheckpoint ckpt;
    ckpt.audio.trunk = read_net(is, NetRole::AudioTrunk);
    ckpt.audio.head = read_net(is, NetRole::AudioHead);
    io::expect_eof(is, "checkpoint");
    return ckpt;
}

} // namespace xma
