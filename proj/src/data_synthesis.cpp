#include "xma/data_synthesis.hpp"

#include <cmath>
#include <cstring>

#include "xma/errors.hpp"
#include "xma/io.hpp"
#include "xma/kernels.hpp"

namespace xma {
namespace {

constexpr std::uint16_t kDatasetVersion = 1;
constexpr char kDatasetMagic[4] = {'X', 'M', 'A', 'V'};
constexpr int kMaskAttempts = 10000;

double q32(double v) { return double(float(v)); }

void check_config(const SynthConfig& c) {
    if (c.classes == 0 || c.clips_per_class == 0 || c.timesteps == 0)
        throw ConfigError("dataset counts must be positive");
    if (c.visual_dim == 0 || c.audio_dim == 0 || c.latent_dim == 0)
        throw ConfigError("dataset dimensions must be positive");
    if (c.visual_dim < c.latent_dim || c.audio_dim < c.latent_dim)
        throw ConfigError("observation dims must be at least the latent dim");
    if (!(c.p_event > 0.0) || c.p_event > 1.0)
        throw ConfigError("p_event must lie in (0, 1]");
    if (!(c.sigma >= 0.0)) throw ConfigError("sigma must be nonnegative");
    if (!(c.distractor >= 0.0)) throw ConfigError("distractor must be nonnegative");
}

// out = P z for P rows x cols, z cols.
void project(const Matrix& p, const Vec& z, Vec& out) {
    out.assign(p.rows, 0.0);
    for (std::size_t r = 0; r < p.rows; ++r) {
        double acc = 0.0;
        const double* pr = p.row(r);
        for (std::size_t c = 0; c < p.cols; ++c) acc += pr[c] * z[c];
        out[r] = acc;
    }
}

} // namespace

Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows < cols) throw ShapeError("orthonormal basis needs rows >= cols");
    Matrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = rng.normal();
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t p = 0; p < j; ++p) {
            double proj = 0.0;
            for (std::size_t i = 0; i < rows; ++i) proj += m.at(i, j) * m.at(i, p);
            for (std::size_t i = 0; i < rows; ++i) m.at(i, j) -= proj * m.at(i, p);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < rows; ++i) norm += m.at(i, j) * m.at(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw DegenerateInputError("basis column collapsed");
        for (std::size_t i = 0; i < rows; ++i) m.at(i, j) /= norm;
    }
    return m;
}

Matrix visual_projection(const DatasetHeader& header) {
    Rng rng = Rng::stream(header.seed, kStreamVisualProjection);
    return orthonormal_columns(header.visual_dim, header.latent_dim, rng);
}

Matrix audio_projection(const DatasetHeader& header) {
    Rng rng = Rng::stream(header.seed, kStreamAudioProjection);
    return orthonormal_columns(header.audio_dim, header.latent_dim, rng);
}

std::vector<Vec> class_prototypes(const DatasetHeader& header) {
    Rng rng = Rng::stream(header.seed, kStreamPrototypes);
    const double scale = std::sqrt(double(header.latent_dim));
    std::vector<Vec> protos(header.classes);
    for (auto& proto : protos) {
        Vec v(header.latent_dim);
        for (double& x : v) x = rng.normal();
        proto = unit_normalize(v);
        for (double& x : proto) x *= scale;
    }
    return protos;
}

Dataset synth_dataset(const SynthConfig& config) {
    check_config(config);
    Dataset ds;
    ds.header = DatasetHeader{config.classes,
                              config.classes * config.clips_per_class,
                              config.timesteps,
                              config.visual_dim,
                              config.audio_dim,
                              config.latent_dim,
                              config.p_event,
                              config.sigma,
                              config.seed};
    const Matrix p_v = visual_projection(ds.header);
    const Matrix p_a = audio_projection(ds.header);
    const std::vector<Vec> protos = class_prototypes(ds.header);

    const std::size_t t_count = config.timesteps;
    ds.clips.resize(ds.header.clips);
    kernels::for_each_index(ds.header.clips, [&](std::size_t c) {
        Rng rng = Rng::stream(config.seed, kStreamClipBase + c);
        ClipRecord& clip = ds.clips[c];
        clip.id = std::uint32_t(c);
        clip.label = std::uint32_t(c / config.clips_per_class);

        Vec z = protos[clip.label];
        for (double& x : z) x += kPrototypeJitter * rng.normal();

        clip.event_mask.assign(t_count, 0);
        bool any = false;
        for (int attempt = 0; attempt < kMaskAttempts && !any; ++attempt) {
            for (std::size_t t = 0; t < t_count; ++t) {
                clip.event_mask[t] = rng.uniform01() < config.p_event ? 1 : 0;
                any = any || clip.event_mask[t] != 0;
            }
        }
        if (!any) throw DegenerateInputError("event mask stayed empty");

        clip.visual = Matrix(t_count, config.visual_dim);
        clip.audio = Matrix(t_count, config.audio_dim);
        Vec noise_v(config.visual_dim), noise_a(config.audio_dim);
        Vec mean_v, mean_a;
        project(p_v, z, mean_v);
        project(p_a, z, mean_a);
        for (std::size_t t = 0; t < t_count; ++t) {
            for (double& x : noise_v) x = rng.normal();
            for (double& x : noise_a) x = rng.normal();
            if (clip.event_mask[t]) {
                for (std::size_t i = 0; i < config.visual_dim; ++i)
                    clip.visual.at(t, i) = q32(mean_v[i] + config.sigma * noise_v[i]);
                for (std::size_t i = 0; i < config.audio_dim; ++i)
                    clip.audio.at(t, i) = q32(mean_a[i] + config.sigma * noise_a[i]);
            } else {
                for (std::size_t i = 0; i < config.visual_dim; ++i)
                    clip.visual.at(t, i) = q32(config.distractor * noise_v[i]);
                for (std::size_t i = 0; i < config.audio_dim; ++i)
                    clip.audio.at(t, i) = q32(config.distractor * noise_a[i]);
            }
        }
    });
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    const DatasetHeader& h = dataset.header;
    if (dataset.clips.size() != h.clips)
        throw ShapeError("clip count does not match header");
    io::atomic_write(path, [&](std::ostream& os) {
        io::put_bytes(os, kDatasetMagic, 4);
        io::put<std::uint16_t>(os, kDatasetVersion);
        io::put<std::uint32_t>(os, h.classes);
        io::put<std::uint32_t>(os, h.clips);
        io::put<std::uint32_t>(os, h.timesteps);
        io::put<std::uint32_t>(os, h.visual_dim);
        io::put<std::uint32_t>(os, h.audio_dim);
        io::put<std::uint32_t>(os, h.latent_dim);
        io::put<double>(os, h.p_event);
        io::put<double>(os, h.sigma);
        io::put<std::uint64_t>(os, h.seed);
        for (const ClipRecord& clip : dataset.clips) {
            io::put<std::uint32_t>(os, clip.id);
            io::put<std::uint32_t>(os, clip.label);
            io::put_bytes(os, clip.event_mask.data(), clip.event_mask.size());
            for (double v : clip.visual.data) io::put<float>(os, float(v));
            for (double v : clip.audio.data) io::put<float>(os, float(v));
        }
    });
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is = io::open_input(path);
    char magic[4];
    io::get_bytes(is, magic, 4, "magic");
    if (std::memcmp(magic, kDatasetMagic, 4) != 0)
        throw BadMagicError("not a dataset file: " + path.string());
    const auto version = io::get<std::uint16_t>(is, "version");
    if (version != kDatasetVersion)
        throw VersionMismatchError("unsupported dataset version " +
                                   std::to_string(version));
    Dataset ds;
    DatasetHeader& h = ds.header;
    h.classes = io::get<std::uint32_t>(is, "header");
    h.clips = io::get<std::uint32_t>(is, "header");
    h.timesteps = io::get<std::uint32_t>(is, "header");
    h.visual_dim = io::get<std::uint32_t>(is, "header");
    h.audio_dim = io::get<std::uint32_t>(is, "header");
    h.latent_dim = io::get<std::uint32_t>(is, "header");
    h.p_event = io::get<double>(is, "header");
    h.sigma = io::get<double>(is, "header");
    h.seed = io::get<std::uint64_t>(is, "header");
    if (h.classes == 0 || h.clips == 0 || h.timesteps == 0)
        throw IoError("dataset header has empty dimensions");

    ds.clips.resize(h.clips);
    std::vector<float> buf;
    for (std::size_t c = 0; c < ds.clips.size(); ++c) {
        ClipRecord& clip = ds.clips[c];
        const std::string where = "clip " + std::to_string(c);
        clip.id = io::get<std::uint32_t>(is, where.c_str());
        clip.label = io::get<std::uint32_t>(is, where.c_str());
        if (clip.label >= h.classes)
            throw IoError(where + " has label out of range");
        clip.event_mask.resize(h.timesteps);
        const std::string mask_what = where + " event mask";
        io::get_bytes(is, clip.event_mask.data(), h.timesteps, mask_what.c_str());
        clip.visual = Matrix(h.timesteps, h.visual_dim);
        buf.resize(clip.visual.data.size());
        const std::string vis_what = where + " visual frames";
        io::get_bytes(is, buf.data(), buf.size() * sizeof(float), vis_what.c_str());
        for (std::size_t i = 0; i < buf.size(); ++i) clip.visual.data[i] = buf[i];
        clip.audio = Matrix(h.timesteps, h.audio_dim);
        buf.resize(clip.audio.data.size());
        const std::string aud_what = where + " audio frames";
        io::get_bytes(is, buf.data(), buf.size() * sizeof(float), aud_what.c_str());
        for (std::size_t i = 0; i < buf.size(); ++i) clip.audio.data[i] = buf[i];
    }
    io::expect_eof(is, "last clip");
    return ds;
}

SplitIndices split_dataset(const DatasetHeader& header) {
    if (header.classes == 0 || header.clips % header.classes != 0)
        throw ShapeError("clips must divide evenly into classes");
    const std::size_t per_class = header.clips / header.classes;
    const auto n_train = std::size_t(std::lround(0.70 * double(per_class)));
    const auto n_val = std::size_t(std::lround(0.15 * double(per_class)));
    if (n_train + n_val >= per_class)
        throw ConfigError("too few clips per class to split");
    SplitIndices s;
    for (std::size_t k = 0; k < header.classes; ++k) {
        const std::size_t base = k * per_class;
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t idx = base + i;
            if (i < n_train)
                s.train.push_back(idx);
            else if (i < n_train + n_val)
                s.val.push_back(idx);
            else
                s.test.push_back(idx);
        }
    }
    return s;
}

} // namespace xma
