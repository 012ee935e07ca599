#include "xma/pair_selection.hpp"

#include <algorithm>
#include <cmath>

#include "xma/errors.hpp"
#include "xma/kernels.hpp"

namespace xma {
namespace {

// q = Pᵀ x per timestep row, then unit rows (zero rows stay zero).
Matrix backproject_rows(const Matrix& frames, const Matrix& projection) {
    if (frames.cols != projection.rows)
        throw ShapeError("frame dimension does not match projection");
    Matrix q(frames.rows, projection.cols);
    for (std::size_t t = 0; t < frames.rows; ++t) {
        const double* x = frames.row(t);
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < projection.cols; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < projection.rows; ++i)
                acc += projection.at(i, j) * x[i];
            q.at(t, j) = acc;
            norm_sq += acc * acc;
        }
        const double norm = std::sqrt(norm_sq);
        if (norm > 1e-15)
            for (std::size_t j = 0; j < projection.cols; ++j) q.at(t, j) /= norm;
        else
            for (std::size_t j = 0; j < projection.cols; ++j) q.at(t, j) = 0.0;
    }
    return q;
}

} // namespace

TimeAlignedFeatures aligned_features(const ClipRecord& clip, const Matrix& p_visual,
                                     const Matrix& p_audio) {
    if (p_visual.cols != p_audio.cols)
        throw ShapeError("projections disagree on the shared dimension");
    TimeAlignedFeatures f;
    f.q_visual = backproject_rows(clip.visual, p_visual);
    f.q_audio = backproject_rows(clip.audio, p_audio);
    return f;
}

Vec correlation_scores(const TimeAlignedFeatures& f) {
    if (f.q_visual.rows != f.q_audio.rows || f.q_visual.cols != f.q_audio.cols)
        throw ShapeError("aligned features disagree in shape");
    if (f.q_visual.rows == 0) throw ShapeError("no timesteps to score");
    Vec scores(f.q_visual.rows);
    for (std::size_t t = 0; t < scores.size(); ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < f.q_visual.cols; ++j)
            acc += f.q_visual.at(t, j) * f.q_audio.at(t, j);
        scores[t] = acc;
    }
    require_finite(scores, "correlation scores");
    return scores;
}

MomentAnnotation top_k_moments(const Vec& scores, std::size_t k) {
    if (k == 0 || k > scores.size())
        throw ConfigError("k must lie in [1, timestep count]");
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    MomentAnnotation ann;
    ann.indices.assign(order.begin(), order.begin() + std::ptrdiff_t(k));
    ann.scores = scores;
    return ann;
}

std::vector<MomentAnnotation> annotate_dataset(const Dataset& dataset, PairSource mode,
                                               double low_confidence_threshold) {
    if (dataset.clips.empty()) throw ShapeError("empty dataset");
    std::vector<MomentAnnotation> annotations(dataset.clips.size());
    if (mode == PairSource::MidFrame) {
        const std::size_t mid = dataset.header.timesteps / 2;
        for (std::size_t c = 0; c < dataset.clips.size(); ++c) {
            annotations[c].clip_id = dataset.clips[c].id;
            annotations[c].indices = {mid};
        }
        return annotations;
    }
    const Matrix p_v = visual_projection(dataset.header);
    const Matrix p_a = audio_projection(dataset.header);
    kernels::for_each_index(dataset.clips.size(), [&](std::size_t c) {
        const TimeAlignedFeatures f = aligned_features(dataset.clips[c], p_v, p_a);
        const Vec scores = correlation_scores(f);
        MomentAnnotation ann = top_k_moments(scores, 1);
        ann.clip_id = dataset.clips[c].id;
        ann.low_confidence = scores[ann.indices.front()] < low_confidence_threshold;
        annotations[c] = std::move(ann);
    });
    return annotations;
}

std::size_t paired_timestep(const MomentAnnotation& annotation) {
    if (annotation.indices.empty()) throw ShapeError("annotation has no indices");
    return annotation.indices.front();
}

double selection_accuracy(const Dataset& dataset) {
    const auto annotations = annotate_dataset(dataset, PairSource::SelectedTop1);
    std::size_t hits = 0;
    for (std::size_t c = 0; c < dataset.clips.size(); ++c)
        if (dataset.clips[c].event_mask[paired_timestep(annotations[c])] != 0) ++hits;
    return double(hits) / double(dataset.clips.size());
}

} // namespace xma
