#include "xma/report.hpp"

#include <charconv>
#include <sstream>

#include "xma/io.hpp"

namespace xma {
namespace {

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Json baseline_json(const BaselineRow& row) {
    return Json{{"top1", row.top1}, {"top5", row.top5}};
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

Json config_json(const ExperimentConfig& config) {
    Json j = Json::object();
    for (const auto& [key, value] : echo_config(config)) j[key] = value;
    return j;
}

std::string config_echo_text(const ExperimentConfig& config) {
    std::ostringstream out;
    for (const auto& [key, value] : echo_config(config))
        out << key << " = " << value << "\n";
    return out.str();
}

Json report_skeleton(const ExperimentConfig& config) {
    Json j = Json::object();
    j["schema_version"] = kReportSchemaVersion;
    j["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
    j["seed"] = config.seed;
    j["config"] = config_json(config);
    return j;
}

Json training_log_json(const TrainingLog& log) {
    Json epochs = Json::array();
    for (const EpochEntry& e : log.epochs) {
        epochs.push_back(Json{{"epoch", e.epoch},
                              {"train_loss", e.train_loss},
                              {"val_metric", e.val_metric},
                              {"wall_ms", e.wall_ms}});
    }
    return Json{{"epochs", epochs},
                {"best_epoch", log.best_epoch},
                {"early_stop_epoch", log.early_stop_epoch},
                {"stopped_early", log.stopped_early},
                {"final_val_metric", log.final_val_metric}};
}

Json eval_report_json(const EvalReport& report) {
    Json j = Json::object();
    j["recall"] = Json{{"instance_top1", report.recall1_instance},
                       {"instance_top5", report.recall5_instance},
                       {"class_top1", report.recall1_class},
                       {"class_top5", report.recall5_class},
                       {"generated_top1", report.recall1_generated},
                       {"generated_top5", report.recall5_generated}};
    j["per_class_recall1"] = vec_json(report.per_class_recall1);
    j["frechet"] = Json{{"value", report.frechet.value},
                        {"clamped_mass", report.frechet.clamped_mass},
                        {"ridged", report.frechet.ridged}};
    j["score_analog"] = report.score;
    j["baselines"] = Json{{"generated_from_audio", baseline_json(report.generated_from_audio)},
                          {"retrieval_baseline", baseline_json(report.retrieval_baseline)},
                          {"upper_bound_frames", baseline_json(report.upper_bound_frames)}};
    j["classes"] = report.classes;
    j["queries"] = report.queries;
    return j;
}

Json gap_report_json(const GapReport& report) {
    Json j = Json::object();
    j["pairs"] = report.pairs;
    j["alignment"] = report.alignment;
    j["magnitude"] = Json{{"mean", report.magnitude_mean},
                          {"std", report.magnitude_std},
                          {"values", vec_json(report.magnitudes)}};
    j["orthogonality"] = Json{{"visual", vec_json(report.orthogonality_visual)},
                              {"audio", vec_json(report.orthogonality_audio)}};
    j["centering"] = Json{{"visual", vec_json(report.centering_visual)},
                          {"audio", vec_json(report.centering_audio)}};
    j["degenerate_mean_gap"] = report.degenerate_mean_gap;
    return j;
}

Json annotations_json(const std::vector<MomentAnnotation>& annotations,
                      PairSource mode) {
    const std::string mode_name = pair_source_name(mode);
    Json clips = Json::array();
    for (const MomentAnnotation& a : annotations) {
        Json indices = Json::array();
        for (std::size_t t : a.indices) indices.push_back(t);
        clips.push_back(Json{{"clip_id", a.clip_id},
                             {"mode", mode_name},
                             {"indices", indices},
                             {"scores", vec_json(a.scores)},
                             {"low_confidence", a.low_confidence}});
    }
    return Json{{"mode", mode_name}, {"clips", clips}};
}

Json annotations_summary_json(const std::vector<MomentAnnotation>& annotations,
                              PairSource mode) {
    std::size_t low = 0;
    for (const MomentAnnotation& a : annotations)
        if (a.low_confidence) ++low;
    return Json{{"mode", pair_source_name(mode)},
                {"clips", annotations.size()},
                {"low_confidence", low}};
}

Json error_json(const std::string& type, const std::string& message) {
    return Json{{"error", Json{{"type", type}, {"message", message}}}};
}

Json strip_wall_clock(const Json& j) {
    if (j.is_object()) {
        Json out = Json::object();
        for (const auto& [key, value] : j.items()) {
            if (key.size() >= 3 && key.compare(key.size() - 3, 3, "_ms") == 0)
                continue;
            out[key] = strip_wall_clock(value);
        }
        return out;
    }
    if (j.is_array()) {
        Json out = Json::array();
        for (const auto& value : j) out.push_back(strip_wall_clock(value));
        return out;
    }
    return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    io::atomic_write(path, [&j](std::ostream& os) { os << j.dump(2) << "\n"; });
}

void write_ablation_csv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows) {
    io::atomic_write(path, [&rows](std::ostream& os) {
        os << "loss_variant,pair_source,duration_timesteps,recall_at_1,recall_at_5,"
              "direct_recall_at_1,instance_recall_at_1\n";
        for (const AblationRow& r : rows) {
            os << r.loss << ',' << r.pair_source << ',' << r.duration << ','
               << format_double(r.recall1) << ',' << format_double(r.recall5) << ','
               << format_double(r.direct_recall1) << ','
               << format_double(r.instance_recall1) << '\n';
        }
    });
}

void write_projection_csv(const std::filesystem::path& path,
                          const Projection2D& projection,
                          const std::vector<std::uint32_t>& labels) {
    if (labels.size() != projection.visual_xy.rows ||
        labels.size() != projection.audio_xy.rows)
        throw ShapeError("projection rows and labels disagree");
    io::atomic_write(path, [&projection, &labels](std::ostream& os) {
        os << "modality,class,x,y\n";
        for (std::size_t i = 0; i < projection.visual_xy.rows; ++i) {
            os << "visual," << labels[i] << ','
               << format_double(projection.visual_xy.at(i, 0)) << ','
               << format_double(projection.visual_xy.at(i, 1)) << '\n';
        }
        for (std::size_t i = 0; i < projection.audio_xy.rows; ++i) {
            os << "audio," << labels[i] << ','
               << format_double(projection.audio_xy.at(i, 0)) << ','
               << format_double(projection.audio_xy.at(i, 1)) << '\n';
        }
    });
}

void write_per_class_csv(const std::filesystem::path& path, const Vec& recalls) {
    io::atomic_write(path, [&recalls](std::ostream& os) {
        os << "class,recall_at_1\n";
        for (std::size_t c = 0; c < recalls.size(); ++c)
            os << c << ',' << format_double(recalls[c]) << '\n';
    });
}

void write_saliency_csv(const std::filesystem::path& path,
                        const std::vector<SaliencyRow>& rows) {
    io::atomic_write(path, [&rows](std::ostream& os) {
        os << "clip_id,timestep,weight\n";
        for (const SaliencyRow& r : rows)
            for (std::size_t t = 0; t < r.weights.size(); ++t)
                os << r.clip_id << ',' << t << ',' << format_double(r.weights[t])
                   << '\n';
    });
}

} // namespace xma
