#include "xma/encoders.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "xma/errors.hpp"
#include "xma/evaluation.hpp"
#include "xma/kernels.hpp"

namespace xma {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

// Mean over channels with a canonical (sorted) summation order, so the
// result does not depend on timestep order.
Vec pooled_mean(const std::vector<Vec>& rows) {
    const std::size_t t_count = rows.size();
    const std::size_t dim = rows.front().size();
    Vec pooled(dim);
    Vec column(t_count);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t t = 0; t < t_count; ++t) column[t] = rows[t][c];
        std::sort(column.begin(), column.end());
        double acc = 0.0;
        for (double v : column) acc += v;
        pooled[c] = acc / double(t_count);
    }
    return pooled;
}

} // namespace

Mlp make_visual_encoder(const ModelDims& dims, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, kStreamVisualInit);
    NetworkSpec spec{{dims.visual_dim, dims.visual_hidden, dims.embed_dim},
                     Activation::Relu, InputKind::FlatVector};
    return make_mlp(spec, rng);
}

Mlp make_generator(const ModelDims& dims, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, kStreamGeneratorInit);
    NetworkSpec spec{{dims.noise_dim + dims.embed_dim, dims.generator_hidden,
                      dims.visual_dim},
                     Activation::Tanh, InputKind::FlatVector};
    return make_mlp(spec, rng);
}

AudioEncoder make_audio_encoder(const ModelDims& dims, std::uint64_t seed) {
    Rng trunk_rng = Rng::stream(seed, kStreamAudioTrunkInit);
    Rng head_rng = Rng::stream(seed, kStreamAudioHeadInit);
    NetworkSpec trunk_spec{{dims.audio_dim, dims.audio_hidden, dims.audio_trunk_dim},
                           Activation::Relu, InputKind::TemporalSequence};
    NetworkSpec head_spec{{dims.audio_trunk_dim, dims.embed_dim}, Activation::Relu,
                          InputKind::FlatVector};
    AudioEncoder enc;
    enc.trunk = make_mlp(trunk_spec, trunk_rng, /*activate_final=*/true);
    enc.head = make_mlp(head_spec, head_rng);
    return enc;
}

Vec forward_visual(const Mlp& f_v, const Vec& frame) {
    return mlp_forward(f_v, frame);
}

Vec forward_audio(const AudioEncoder& enc, const Matrix& clip_audio) {
    if (clip_audio.rows == 0) throw ShapeError("audio clip has no timesteps");
    std::vector<Vec> rows(clip_audio.rows);
    for (std::size_t t = 0; t < clip_audio.rows; ++t)
        rows[t] = mlp_forward(enc.trunk, clip_audio.row_vec(t));
    return mlp_forward(enc.head, pooled_mean(rows));
}

Vec forward_audio_trace(const AudioEncoder& enc, const Matrix& clip_audio,
                        AudioTrace& trace) {
    if (clip_audio.rows == 0) throw ShapeError("audio clip has no timesteps");
    trace.trunk.resize(clip_audio.rows);
    std::vector<Vec> rows(clip_audio.rows);
    for (std::size_t t = 0; t < clip_audio.rows; ++t) {
        trace.trunk[t] = mlp_forward_trace(enc.trunk, clip_audio.row_vec(t));
        rows[t] = trace.trunk[t].post.back();
    }
    trace.pooled = pooled_mean(rows);
    trace.head = mlp_forward_trace(enc.head, trace.pooled);
    return trace.head.post.back();
}

void backward_audio(const AudioEncoder& enc, const AudioTrace& trace,
                    const Vec& d_out, MlpGrads& trunk_grads, MlpGrads& head_grads) {
    const Vec d_pooled = mlp_backward(enc.head, trace.head, d_out, &head_grads);
    const std::size_t t_count = trace.trunk.size();
    Vec d_row(d_pooled.size());
    for (std::size_t i = 0; i < d_row.size(); ++i)
        d_row[i] = d_pooled[i] / double(t_count);
    for (std::size_t t = 0; t < t_count; ++t)
        mlp_backward(enc.trunk, trace.trunk[t], d_row, &trunk_grads);
}

namespace {

constexpr double kZeroConditioning = 1e-12;

} // namespace

Vec generator_conditioning(const Vec& z_cond) {
    const double n = norm2(z_cond);
    if (n <= kZeroConditioning) return z_cond;
    Vec out(z_cond.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = z_cond[i] / n;
    return out;
}

Vec generator_conditioning_backward(const Vec& z_cond, const Vec& d_cond) {
    const double n = norm2(z_cond);
    if (n <= kZeroConditioning) return d_cond;
    Vec unit(z_cond.size());
    for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = z_cond[i] / n;
    const double along = dot(d_cond, unit);
    Vec out(d_cond.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (d_cond[i] - along * unit[i]) / n;
    return out;
}

Vec generate(const Mlp& g, const Vec& z_noise, const Vec& z_cond) {
    if (z_noise.size() + z_cond.size() != g.spec.input_dim())
        throw ShapeError("latent sizes do not match generator input");
    const Vec cond = generator_conditioning(z_cond);
    Vec u;
    u.reserve(g.spec.input_dim());
    u.insert(u.end(), z_noise.begin(), z_noise.end());
    u.insert(u.end(), cond.begin(), cond.end());
    return mlp_forward(g, u);
}

std::size_t window_start(std::size_t chosen, std::size_t duration,
                         std::size_t timesteps) {
    if (duration == 0 || duration > timesteps)
        throw ConfigError("window duration must lie in [1, timesteps]");
    if (chosen >= timesteps) throw ShapeError("chosen timestep out of range");
    const std::size_t half = duration / 2;
    std::size_t start = chosen > half ? chosen - half : 0;
    if (start + duration > timesteps) start = timesteps - duration;
    return start;
}

Matrix audio_window(const ClipRecord& clip, std::size_t chosen, std::size_t duration) {
    const std::size_t start = window_start(chosen, duration, clip.audio.rows);
    Matrix window(duration, clip.audio.cols);
    for (std::size_t t = 0; t < duration; ++t)
        for (std::size_t c = 0; c < clip.audio.cols; ++c)
            window.at(t, c) = clip.audio.at(start + t, c);
    return window;
}

Matrix visual_embeddings(const Mlp& f_v, const Dataset& dataset,
                         const std::vector<std::size_t>& clip_indices,
                         const std::vector<MomentAnnotation>& annotations) {
    Matrix out(clip_indices.size(), f_v.spec.output_dim());
    kernels::for_each_index(clip_indices.size(), [&](std::size_t i) {
        const ClipRecord& clip = dataset.clips[clip_indices[i]];
        const std::size_t t = paired_timestep(annotations[clip_indices[i]]);
        out.set_row(i, mlp_forward(f_v, clip.visual.row_vec(t)));
    });
    return out;
}

Matrix audio_embeddings(const AudioEncoder& enc, const Dataset& dataset,
                        const std::vector<std::size_t>& clip_indices,
                        const std::vector<MomentAnnotation>& annotations,
                        std::size_t duration) {
    Matrix out(clip_indices.size(), enc.head.spec.output_dim());
    kernels::for_each_index(clip_indices.size(), [&](std::size_t i) {
        const ClipRecord& clip = dataset.clips[clip_indices[i]];
        const std::size_t t = paired_timestep(annotations[clip_indices[i]]);
        out.set_row(i, forward_audio(enc, audio_window(clip, t, duration)));
    });
    return out;
}

std::vector<std::uint32_t> labels_of(const Dataset& dataset,
                                     const std::vector<std::size_t>& clip_indices) {
    std::vector<std::uint32_t> labels(clip_indices.size());
    for (std::size_t i = 0; i < clip_indices.size(); ++i)
        labels[i] = dataset.clips[clip_indices[i]].label;
    return labels;
}

namespace {

struct FramePool {
    std::vector<std::pair<std::size_t, std::size_t>> frames; // (clip, timestep)
};

FramePool all_frames(const Dataset& dataset, const std::vector<std::size_t>& clips) {
    FramePool pool;
    pool.frames.reserve(clips.size() * dataset.header.timesteps);
    for (std::size_t c : clips)
        for (std::size_t t = 0; t < dataset.header.timesteps; ++t)
            pool.frames.emplace_back(c, t);
    return pool;
}

double reconstruction_error(const Mlp& f_v, const Mlp& g, const Dataset& dataset,
                            const FramePool& pool) {
    Vec errors(pool.frames.size());
    const Vec zero_noise(g.spec.input_dim() - f_v.spec.output_dim(), 0.0);
    kernels::for_each_index(pool.frames.size(), [&](std::size_t i) {
        const auto [c, t] = pool.frames[i];
        const Vec x = dataset.clips[c].visual.row_vec(t);
        const Vec out = generate(g, zero_noise, mlp_forward(f_v, x));
        double err = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = out[j] - x[j];
            err += d * d;
        }
        errors[i] = err;
    });
    double total = 0.0;
    for (double e : errors) total += e;
    return total / double(errors.size());
}

} // namespace

PretrainResult pretrain_visual(const Dataset& dataset, const ModelDims& dims,
                               const PretrainConfig& config, std::uint64_t seed) {
    if (dataset.clips.empty()) throw ShapeError("empty dataset");
    if (dims.visual_dim != dataset.header.visual_dim)
        throw ConfigError("visual dimension does not match dataset");
    if (config.batch_size == 0) throw ConfigError("batch size must be positive");

    const SplitIndices splits = split_dataset(dataset.header);
    const FramePool train_pool = all_frames(dataset, splits.train);
    const FramePool val_pool = all_frames(dataset, splits.val);

    PretrainResult result;
    result.visual = make_visual_encoder(dims, seed);
    result.generator = make_generator(dims, seed);
    Mlp& f_v = result.visual;
    Mlp& g = result.generator;

    AdamConfig adam;
    adam.lr = config.lr;
    adam.weight_decay = config.weight_decay;
    AdamState opt_v(f_v, adam), opt_g(g, adam);
    MlpGrads grads_v(f_v), grads_g(g);

    std::vector<std::size_t> order(train_pool.frames.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<ForwardTrace> traces_v(config.batch_size), traces_g(config.batch_size);
    Matrix noises(config.batch_size, dims.noise_dim);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = Clock::now();
        Rng shuffle_rng = Rng::stream(seed, kStreamPretrainShuffle + epoch);
        Rng noise_rng = Rng::stream(seed, kStreamPretrainNoise + epoch);
        shuffle_indices(order, shuffle_rng);

        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t b = std::min(config.batch_size, order.size() - begin);
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = 0; j < dims.noise_dim; ++j)
                    noises.at(i, j) = noise_rng.normal();
            kernels::for_each_index(b, [&](std::size_t i) {
                const auto [c, t] = train_pool.frames[order[begin + i]];
                traces_v[i] =
                    mlp_forward_trace(f_v, dataset.clips[c].visual.row_vec(t));
                Vec u = noises.row_vec(i);
                const Vec cond = generator_conditioning(traces_v[i].post.back());
                u.insert(u.end(), cond.begin(), cond.end());
                traces_g[i] = mlp_forward_trace(g, u);
            });
            grads_v.zero();
            grads_g.zero();
            for (std::size_t i = 0; i < b; ++i) {
                const auto [c, t] = train_pool.frames[order[begin + i]];
                const double* x = dataset.clips[c].visual.row(t);
                const Vec& out = traces_g[i].post.back();
                Vec d_out(out.size());
                double err = 0.0;
                for (std::size_t j = 0; j < out.size(); ++j) {
                    const double d = out[j] - x[j];
                    err += d * d;
                    d_out[j] = 2.0 * d / double(b);
                }
                loss_sum += err;
                const Vec d_u = mlp_backward(g, traces_g[i], d_out, &grads_g);
                const Vec d_cond(d_u.begin() + std::ptrdiff_t(dims.noise_dim),
                                 d_u.end());
                const Vec d_emb = generator_conditioning_backward(
                    traces_v[i].post.back(), d_cond);
                mlp_backward(f_v, traces_v[i], d_emb, &grads_v);
            }
            adam_step(f_v, grads_v, opt_v);
            adam_step(g, grads_g, opt_g);
        }
        const double epoch_loss = loss_sum / double(train_pool.frames.size());
        if (!std::isfinite(epoch_loss))
            throw NumericError("pretraining loss became non-finite");
        const double val_err = reconstruction_error(f_v, g, dataset, val_pool);
        result.log.epochs.push_back({epoch, epoch_loss, val_err, ms_since(t0)});
    }

    result.log.best_epoch = config.epochs;
    result.log.final_val_metric = reconstruction_error(f_v, g, dataset, val_pool);
    f_v.frozen = true;
    g.frozen = true;
    return result;
}

namespace {

double validation_recall(const AudioEncoder& enc, const Dataset& dataset,
                         const SplitIndices& splits,
                         const std::vector<MomentAnnotation>& annotations,
                         std::size_t duration, const Matrix& val_visual) {
    const Matrix val_audio =
        audio_embeddings(enc, dataset, splits.val, annotations, duration);
    const auto labels = labels_of(dataset, splits.val);
    return recall_at_k(val_audio, val_visual, labels, labels, 1, RecallMode::Class);
}

} // namespace

TrainResult train_audio_encoder(const Dataset& dataset, const Mlp& f_v,
                                const ModelDims& dims, const TrainConfig& config,
                                std::uint64_t seed) {
    if (dataset.clips.empty()) throw ShapeError("empty dataset");
    if (!f_v.frozen) throw ConfigError("visual encoder must be frozen");
    if (dims.audio_dim != dataset.header.audio_dim)
        throw ConfigError("audio dimension does not match dataset");
    if (config.batch_size < 2)
        throw ConfigError("contrastive batches need at least 2 items");
    if (config.duration_timesteps == 0 ||
        config.duration_timesteps > dataset.header.timesteps)
        throw ConfigError("duration_timesteps must lie in [1, timesteps]");

    const SplitIndices splits = split_dataset(dataset.header);
    const auto annotations = annotate_dataset(dataset, config.pair_source);
    const Matrix train_visual =
        visual_embeddings(f_v, dataset, splits.train, annotations);
    const Matrix val_visual = visual_embeddings(f_v, dataset, splits.val, annotations);

    TrainResult result;
    result.audio = make_audio_encoder(dims, seed);
    AudioEncoder& enc = result.audio;

    AdamConfig adam;
    adam.lr = config.lr;
    adam.weight_decay = config.weight_decay;
    AdamState opt_trunk(enc.trunk, adam), opt_head(enc.head, adam);
    MlpGrads grads_trunk(enc.trunk), grads_head(enc.head);

    std::vector<std::size_t> order(splits.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<AudioTrace> traces(config.batch_size);

    AudioEncoder best = enc;
    double best_val = -1.0;
    std::size_t best_epoch = 0;
    std::size_t epochs_since_best = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = Clock::now();
        Rng shuffle_rng = Rng::stream(seed, kStreamTrainShuffle + epoch);
        shuffle_indices(order, shuffle_rng);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t b = std::min(config.batch_size, order.size() - begin);
            if (b < 2) continue;
            Matrix audio_batch(b, dims.embed_dim);
            Matrix visual_batch(b, dims.embed_dim);
            kernels::for_each_index(b, [&](std::size_t i) {
                const std::size_t clip_idx = splits.train[order[begin + i]];
                const ClipRecord& clip = dataset.clips[clip_idx];
                const std::size_t t = paired_timestep(annotations[clip_idx]);
                const Matrix window =
                    audio_window(clip, t, config.duration_timesteps);
                audio_batch.set_row(i, forward_audio_trace(enc, window, traces[i]));
                visual_batch.set_row(i, train_visual.row_vec(order[begin + i]));
            });
            const LossResult loss = loss_total(audio_batch, visual_batch, config.variant);
            if (!std::isfinite(loss.value))
                throw NumericError("alignment loss became non-finite");
            loss_sum += loss.value * double(b);
            seen += b;
            grads_trunk.zero();
            grads_head.zero();
            for (std::size_t i = 0; i < b; ++i)
                backward_audio(enc, traces[i], loss.grad_audio.row_vec(i),
                               grads_trunk, grads_head);
            adam_step(enc.trunk, grads_trunk, opt_trunk);
            adam_step(enc.head, grads_head, opt_head);
        }
        const double epoch_loss = seen > 0 ? loss_sum / double(seen) : 0.0;
        const double val_r1 = validation_recall(enc, dataset, splits, annotations,
                                                config.duration_timesteps, val_visual);
        result.log.epochs.push_back({epoch, epoch_loss, val_r1, ms_since(t0)});

        if (val_r1 > best_val) {
            best_val = val_r1;
            best = enc;
            best_epoch = epoch;
            epochs_since_best = 0;
        } else if (++epochs_since_best >= config.patience) {
            result.log.early_stop_epoch = epoch;
            result.log.stopped_early = true;
            break;
        }
    }

    if (best_epoch > 0) {
        result.audio = std::move(best);
        result.log.best_epoch = best_epoch;
        result.log.final_val_metric = best_val;
    }
    return result;
}

InversionResult invert_generator(const Mlp& g, const Vec& target,
                                 std::size_t noise_dim, std::size_t steps,
                                 double step_size) {
    if (target.size() != g.spec.output_dim())
        throw ShapeError("target does not match generator output");
    if (noise_dim >= g.spec.input_dim())
        throw ShapeError("noise dimension exceeds generator input");
    if (!(step_size > 0.0)) throw ConfigError("step size must be positive");

    const auto net_input = [&](const Vec& z) {
        Vec u(z.begin(), z.begin() + std::ptrdiff_t(noise_dim));
        const Vec cond = generator_conditioning(
            Vec(z.begin() + std::ptrdiff_t(noise_dim), z.end()));
        u.insert(u.end(), cond.begin(), cond.end());
        return u;
    };
    const auto objective = [&](const Vec& z) {
        const Vec out = mlp_forward(g, net_input(z));
        double err = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out[i] - target[i];
            err += d * d;
        }
        return err;
    };

    InversionResult result;
    Vec z(g.spec.input_dim(), 0.0);
    double residual = objective(z);
    if (!std::isfinite(residual)) throw NumericError("inversion objective non-finite");

    double eta = step_size;
    for (std::size_t s = 0; s < steps; ++s) {
        if (residual <= 1e-12) break;
        const ForwardTrace trace = mlp_forward_trace(g, net_input(z));
        Vec d_out(target.size());
        for (std::size_t i = 0; i < d_out.size(); ++i)
            d_out[i] = 2.0 * (trace.post.back()[i] - target[i]);
        const Vec d_u = mlp_backward(g, trace, d_out, nullptr);
        Vec grad(d_u.begin(), d_u.begin() + std::ptrdiff_t(noise_dim));
        const Vec d_cond = generator_conditioning_backward(
            Vec(z.begin() + std::ptrdiff_t(noise_dim), z.end()),
            Vec(d_u.begin() + std::ptrdiff_t(noise_dim), d_u.end()));
        grad.insert(grad.end(), d_cond.begin(), d_cond.end());

        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving) {
            Vec z_try(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) z_try[i] = z[i] - eta * grad[i];
            const double r_try = objective(z_try);
            if (std::isfinite(r_try) && r_try <= residual) {
                z = std::move(z_try);
                residual = r_try;
                eta = std::min(eta * 1.2, 1e6);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break;
        result.accepted_steps += 1;
    }

    result.z_noise.assign(z.begin(), z.begin() + std::ptrdiff_t(noise_dim));
    result.z_cond.assign(z.begin() + std::ptrdiff_t(noise_dim), z.end());
    result.residual = residual;
    return result;
}

} // namespace xma
