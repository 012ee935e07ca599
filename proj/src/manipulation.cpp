#include "xma/manipulation.hpp"

#include <cmath>

#include "xma/errors.hpp"

namespace xma {

AudioClip scale_volume(const AudioClip& clip, double gain) {
    if (!(gain > 0.0)) throw ConfigError("volume gain must be positive");
    AudioClip out = clip;
    for (double& v : out.samples.data) v *= gain;
    out.gain = clip.gain * gain;
    return out;
}

AudioClip mix_clips(const std::vector<AudioClip>& clips, const Vec& weights) {
    if (clips.empty()) throw ShapeError("mix needs at least one clip");
    if (weights.size() != clips.size())
        throw ShapeError("one weight per clip required");
    const Matrix& first = clips.front().samples;
    for (const AudioClip& c : clips)
        if (c.samples.rows != first.rows || c.samples.cols != first.cols)
            throw ShapeError("mixed clips disagree in shape");
    AudioClip out;
    out.samples = Matrix(first.rows, first.cols);
    for (std::size_t i = 0; i < out.samples.data.size(); ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < clips.size(); ++c)
            acc += weights[c] * clips[c].samples.data[i];
        out.samples.data[i] = acc;
    }
    return out;
}

Vec interpolate_latent(const Vec& z_a, const Vec& z_b, double lambda) {
    if (z_a.size() != z_b.size()) throw ShapeError("latent dimensions differ");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ConfigError("interpolation lambda must lie in [0, 1]");
    Vec out(z_a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = lambda * z_a[i] + (1.0 - lambda) * z_b[i];
    return out;
}

Vec edit_direction(const Vec& z_inv, const Vec& z_a1, const Vec& z_a2, double lambda) {
    if (z_inv.size() != z_a1.size() || z_a1.size() != z_a2.size())
        throw ShapeError("latent dimensions differ");
    Vec out(z_inv.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = z_inv[i] + lambda * (z_a1[i] - z_a2[i]);
    return out;
}

SaliencyResult temporal_saliency(const AudioEncoder& enc, const Mlp& g,
                                 const AudioClip& clip) {
    if (!g.frozen) throw ConfigError("saliency requires a frozen generator");
    if (clip.samples.rows == 0) throw ShapeError("clip has no timesteps");

    AudioTrace trace;
    const Vec z = forward_audio_trace(enc, clip.samples, trace);
    const std::size_t noise_dim = g.spec.input_dim() - z.size();
    const Vec zero_noise(noise_dim, 0.0);

    Vec u = zero_noise;
    const Vec cond = generator_conditioning(z);
    u.insert(u.end(), cond.begin(), cond.end());
    const ForwardTrace g_trace = mlp_forward_trace(g, u);
    const Vec& out = g_trace.post.back();
    Vec d_out(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) d_out[i] = 2.0 * out[i];
    const Vec d_u = mlp_backward(g, g_trace, d_out, nullptr);
    const Vec d_z = generator_conditioning_backward(
        z, Vec(d_u.begin() + std::ptrdiff_t(noise_dim), d_u.end()));
    const Vec d_pooled = mlp_backward(enc.head, trace.head, d_z, nullptr);

    const std::size_t t_count = trace.trunk.size();
    SaliencyResult result;
    result.weights.resize(t_count);
    double sum = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
        const Vec& h = trace.trunk[t].post.back();
        double mean = 0.0;
        for (std::size_t c = 0; c < h.size(); ++c)
            mean += (d_pooled[c] / double(t_count)) * h[c];
        mean /= double(h.size());
        result.weights[t] = mean > 0.0 ? mean : 0.0;
        sum += result.weights[t];
    }
    if (sum <= 0.0) {
        result.degenerate = true;
        for (double& w : result.weights) w = 1.0 / double(t_count);
    } else {
        for (double& w : result.weights) w /= sum;
    }
    return result;
}

double saliency_event_concentration(const AudioEncoder& enc, const Mlp& g,
                                    const Dataset& dataset,
                                    const std::vector<std::size_t>& clip_indices) {
    if (clip_indices.empty()) throw ShapeError("no clips to score");
    std::size_t scored = 0, hits = 0;
    for (std::size_t idx : clip_indices) {
        const ClipRecord& clip = dataset.clips[idx];
        std::size_t events = 0;
        for (std::uint8_t m : clip.event_mask) events += m;
        if (events == 0 || events == clip.event_mask.size()) continue;
        AudioClip audio{clip.audio, 1.0};
        const SaliencyResult sal = temporal_saliency(enc, g, audio);
        double event_mean = 0.0, rest_mean = 0.0;
        for (std::size_t t = 0; t < sal.weights.size(); ++t) {
            if (clip.event_mask[t])
                event_mean += sal.weights[t] / double(events);
            else
                rest_mean += sal.weights[t] / double(sal.weights.size() - events);
        }
        ++scored;
        if (event_mean > rest_mean) ++hits;
    }
    if (scored == 0) throw DegenerateInputError("no clips with mixed masks");
    return double(hits) / double(scored);
}

} // namespace xma
