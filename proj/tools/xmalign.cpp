// Experiment runner: synthesizes datasets, trains and evaluates the
// cross-modal alignment models, and emits machine-readable reports.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xma/checkpoint.hpp"
#include "xma/config.hpp"
#include "xma/errors.hpp"
#include "xma/manipulation.hpp"
#include "xma/pipeline.hpp"
#include "xma/report.hpp"

namespace {

using xma::Json;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_config = true) {
    if (with_config)
        cmd->add_option("--config", args.config_path, "experiment config file");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_path, "output path")->required();
    cmd->add_flag("--quiet", args.quiet, "suppress status output");
}

xma::ExperimentConfig resolve_config(const CommonArgs& args) {
    xma::ExperimentConfig config;
    if (!args.config_path.empty()) config = xma::load_config(args.config_path);
    if (args.seed) {
        config.seed = *args.seed;
        config.dataset.seed = *args.seed;
    }
    return config;
}

std::filesystem::path sibling(const std::filesystem::path& primary,
                              const char* extension) {
    std::filesystem::path p = primary;
    p.replace_extension(extension);
    return p;
}

void say(const CommonArgs& args, const std::string& line) {
    if (!args.quiet) std::cout << line << "\n";
}

xma::PairSource parse_pair_source(const std::string& name) {
    if (name == "selected_top1") return xma::PairSource::SelectedTop1;
    if (name == "mid_frame") return xma::PairSource::MidFrame;
    throw xma::ConfigError("unknown pair source '" + name + "'");
}

// Whole-clip audio embedding used by the manipulation experiments.
xma::Vec clip_embedding(const xma::AudioEncoder& enc, const xma::ClipRecord& clip) {
    return xma::forward_audio(enc, clip.audio);
}

const xma::ClipRecord& clip_at(const xma::Dataset& dataset, std::size_t index) {
    if (index >= dataset.clips.size())
        throw xma::ConfigError("clip index " + std::to_string(index) +
                               " out of range (dataset has " +
                               std::to_string(dataset.clips.size()) + " clips)");
    return dataset.clips[index];
}

Json vec_to_json(const xma::Vec& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

// One selected timestep for a single clip, top-1 correlation mode.
std::size_t selected_timestep(const xma::Dataset& dataset,
                              const xma::ClipRecord& clip) {
    const xma::Matrix p_v = xma::visual_projection(dataset.header);
    const xma::Matrix p_a = xma::audio_projection(dataset.header);
    const auto features = xma::aligned_features(clip, p_v, p_a);
    const auto scores = xma::correlation_scores(features);
    return xma::top_k_moments(scores, 1).indices.front();
}

Json default_manipulation_spec(const xma::Dataset& dataset) {
    const xma::SplitIndices splits = xma::split_dataset(dataset.header);
    if (splits.test.size() < 3)
        throw xma::ConfigError("default manipulation spec needs >= 3 test clips");
    const std::size_t a = splits.test[0];
    const std::size_t b = splits.test[1];
    const std::size_t c = splits.test[2];
    Json experiments = Json::array();
    experiments.push_back(Json{{"kind", "volume"}, {"clip", a}, {"gain", 2.0}});
    experiments.push_back(Json{{"kind", "mix"},
                               {"clips", Json::array({a, b})},
                               {"weights", Json::array({0.5, 0.5})}});
    experiments.push_back(
        Json{{"kind", "interpolate"}, {"clip_a", a}, {"clip_b", b}, {"lambda", 0.5}});
    experiments.push_back(Json{{"kind", "edit"},
                               {"clip", a},
                               {"clip_a1", b},
                               {"clip_a2", c},
                               {"lambda", 0.5}});
    experiments.push_back(Json{{"kind", "saliency"}, {"clip", a}});
    return Json{{"experiments", experiments}};
}

Json load_manipulation_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw xma::IoError("cannot open for reading: " + path);
    Json spec = Json::parse(is, nullptr, false);
    if (spec.is_discarded())
        throw xma::ConfigError("manipulation spec is not valid JSON: " + path);
    if (!spec.contains("experiments") || !spec["experiments"].is_array())
        throw xma::ConfigError("manipulation spec needs an 'experiments' array");
    return spec;
}

int run_synth_data(const CommonArgs& args) {
    const xma::ExperimentConfig config = resolve_config(args);
    const xma::Dataset dataset = xma::synth_dataset(config.dataset);
    xma::save_dataset(dataset, args.out_path);
    say(args, "wrote " + std::string(args.out_path) + " (" +
                  std::to_string(dataset.clips.size()) + " clips)");
    return 0;
}

int run_pretrain_visual(const CommonArgs& args, const std::string& dataset_path) {
    const xma::ExperimentConfig config = resolve_config(args);
    const xma::Dataset dataset = xma::load_dataset(dataset_path);
    xma::PretrainResult pre = xma::pretrain_visual(dataset, config.dims(),
                                                   config.pretrain(), config.seed);
    xma::save_visual_checkpoint({pre.visual, pre.generator}, args.out_path);

    Json report = xma::report_skeleton(config);
    report["command"] = "pretrain-visual";
    report["pretrain_log"] = xma::training_log_json(pre.log);
    const auto report_path = sibling(args.out_path, ".report.json");
    xma::write_json(report_path, report);
    say(args, "wrote " + std::string(args.out_path) + " and " +
                  report_path.string() + " (final val recon " +
                  xma::format_double(pre.log.final_val_metric) + ")");
    return 0;
}

int run_train_audio(const CommonArgs& args, const std::string& dataset_path,
                    const std::string& visual_path) {
    const xma::ExperimentConfig config = resolve_config(args);
    const xma::Dataset dataset = xma::load_dataset(dataset_path);
    const xma::VisualCheckpoint visual = xma::load_visual_checkpoint(visual_path);
    xma::TrainResult aligned = xma::train_audio_encoder(
        dataset, visual.visual, config.dims(), config.train, config.seed);
    xma::save_audio_checkpoint({aligned.audio}, args.out_path);

    const auto annotations = xma::annotate_dataset(dataset, config.train.pair_source,
                                                   config.selection_threshold);
    Json report = xma::report_skeleton(config);
    report["command"] = "train-audio";
    report["train_log"] = xma::training_log_json(aligned.log);
    report["annotations"] =
        xma::annotations_summary_json(annotations, config.train.pair_source);
    const auto report_path = sibling(args.out_path, ".report.json");
    xma::write_json(report_path, report);
    say(args, "wrote " + std::string(args.out_path) + " and " +
                  report_path.string() + " (best val R@1 " +
                  xma::format_double(aligned.log.final_val_metric) + ")");
    return 0;
}

int run_select_pairs(const CommonArgs& args, const std::string& dataset_path,
                     const std::string& mode_name, double threshold) {
    const xma::Dataset dataset = xma::load_dataset(dataset_path);
    const xma::PairSource mode = parse_pair_source(mode_name);
    const auto annotations = xma::annotate_dataset(dataset, mode, threshold);

    Json manifest = Json::object();
    manifest["schema_version"] = xma::kReportSchemaVersion;
    manifest["tool"] = Json{{"name", xma::kToolName}, {"version", xma::kToolVersion}};
    manifest["dataset_seed"] = dataset.header.seed;
    manifest["low_confidence_threshold"] = threshold;
    manifest["annotations"] = xma::annotations_json(annotations, mode);
    xma::write_json(args.out_path, manifest);
    say(args, "wrote " + std::string(args.out_path) + " (" +
                  std::to_string(annotations.size()) + " clips)");
    return 0;
}

int run_evaluate(const CommonArgs& args, const std::string& dataset_path,
                 const std::string& visual_path, const std::string& audio_path) {
    const xma::ExperimentConfig config = resolve_config(args);
    const xma::Dataset dataset = xma::load_dataset(dataset_path);
    const xma::VisualCheckpoint visual = xma::load_visual_checkpoint(visual_path);
    const xma::AudioCheckpoint audio = xma::load_audio_checkpoint(audio_path);
    const xma::EvalReport eval = xma::evaluate_model(
        dataset, visual.visual, visual.generator, audio.audio, config);

    Json report = xma::report_skeleton(config);
    report["command"] = "evaluate";
    report["eval"] = xma::eval_report_json(eval);
    xma::write_json(args.out_path, report);
    const auto csv_path = sibling(args.out_path, ".per_class.csv");
    xma::write_per_class_csv(csv_path, eval.per_class_recall1);
    say(args, "wrote " + std::string(args.out_path) + " and " + csv_path.string() +
                  " (class R@1 " + xma::format_double(eval.recall1_class) + ")");
    return 0;
}

int run_gap_report(const CommonArgs& args, const std::string& dataset_path,
                   const std::string& visual_path, const std::string& audio_path) {
    const xma::ExperimentConfig config = resolve_config(args);
    const xma::Dataset dataset = xma::load_dataset(dataset_path);
    const xma::VisualCheckpoint visual = xma::load_visual_checkpoint(visual_path);
    const xma::AudioCheckpoint audio = xma::load_audio_checkpoint(audio_path);
    const xma::GapArtifacts gap =
        xma::gap_artifacts(dataset, visual.visual, audio.audio, config);

    Json report = xma::report_skeleton(config);
    report["command"] = "gap-report";
    report["gap"] = xma::gap_report_json(gap.report);
    xma::write_json(args.out_path, report);
    const auto csv_path = sibling(args.out_path, ".projection.csv");
    xma::write_projection_csv(csv_path, gap.projection, gap.labels);
    say(args, "wrote " + std::string(args.out_path) + " and " + csv_path.string() +
                  " (alignment " + xma::format_double(gap.report.alignment) + ")");
    return 0;
}

int run_manipulate(const CommonArgs& args, const std::string& dataset_path,
                   const std::string& visual_path, const std::string& audio_path,
                   const std::string& spec_path) {
    const xma::ExperimentConfig config = resolve_config(args);
    const xma::Dataset dataset = xma::load_dataset(dataset_path);
    const xma::VisualCheckpoint visual = xma::load_visual_checkpoint(visual_path);
    const xma::AudioCheckpoint audio = xma::load_audio_checkpoint(audio_path);
    const xma::Mlp& g = visual.generator;
    const xma::AudioEncoder& enc = audio.audio;

    const Json spec = spec_path.empty() ? default_manipulation_spec(dataset)
                                        : load_manipulation_spec(spec_path);
    const xma::Vec zero_noise(config.noise_dim, 0.0);

    Json rows = Json::array();
    std::vector<xma::SaliencyRow> saliency_rows;
    for (const Json& experiment : spec.at("experiments")) {
        const std::string kind = experiment.at("kind").get<std::string>();
        Json row = Json::object();
        row["spec"] = experiment;
        if (kind == "volume") {
            const auto& clip = clip_at(dataset, experiment.at("clip").get<std::size_t>());
            const double gain = experiment.at("gain").get<double>();
            const xma::AudioClip scaled =
                xma::scale_volume({clip.audio, 1.0}, gain);
            const xma::Vec z = xma::forward_audio(enc, scaled.samples);
            row["latent"] = vec_to_json(z);
            row["generated"] = vec_to_json(xma::generate(g, zero_noise, z));
            const auto sal = xma::temporal_saliency(enc, g, scaled);
            row["saliency"] = vec_to_json(sal.weights);
            saliency_rows.push_back({clip.id, sal.weights});
        } else if (kind == "mix") {
            std::vector<xma::AudioClip> clips;
            for (const Json& idx : experiment.at("clips"))
                clips.push_back({clip_at(dataset, idx.get<std::size_t>()).audio, 1.0});
            xma::Vec weights;
            for (const Json& w : experiment.at("weights"))
                weights.push_back(w.get<double>());
            const xma::AudioClip mixed = xma::mix_clips(clips, weights);
            const xma::Vec z = xma::forward_audio(enc, mixed.samples);
            row["latent"] = vec_to_json(z);
            row["generated"] = vec_to_json(xma::generate(g, zero_noise, z));
            const auto sal = xma::temporal_saliency(enc, g, mixed);
            row["saliency"] = vec_to_json(sal.weights);
            saliency_rows.push_back(
                {clip_at(dataset, experiment.at("clips").at(0).get<std::size_t>()).id,
                 sal.weights});
        } else if (kind == "interpolate") {
            const auto& clip_a = clip_at(dataset, experiment.at("clip_a").get<std::size_t>());
            const auto& clip_b = clip_at(dataset, experiment.at("clip_b").get<std::size_t>());
            const double lambda = experiment.at("lambda").get<double>();
            const xma::Vec z =
                xma::interpolate_latent(clip_embedding(enc, clip_a),
                                        clip_embedding(enc, clip_b), lambda);
            row["latent"] = vec_to_json(z);
            row["generated"] = vec_to_json(xma::generate(g, zero_noise, z));
        } else if (kind == "edit") {
            const auto& clip = clip_at(dataset, experiment.at("clip").get<std::size_t>());
            const auto& clip_a1 = clip_at(dataset, experiment.at("clip_a1").get<std::size_t>());
            const auto& clip_a2 = clip_at(dataset, experiment.at("clip_a2").get<std::size_t>());
            const double lambda = experiment.at("lambda").get<double>();
            const std::size_t t = selected_timestep(dataset, clip);
            const auto inverted = xma::invert_generator(
                g, clip.visual.row_vec(t), config.noise_dim);
            const xma::Vec z = xma::edit_direction(
                inverted.z_cond, clip_embedding(enc, clip_a1),
                clip_embedding(enc, clip_a2), lambda);
            row["inversion_residual"] = inverted.residual;
            row["latent"] = vec_to_json(z);
            row["generated"] = vec_to_json(xma::generate(g, inverted.z_noise, z));
        } else if (kind == "saliency") {
            const auto& clip = clip_at(dataset, experiment.at("clip").get<std::size_t>());
            const auto sal = xma::temporal_saliency(enc, g, {clip.audio, 1.0});
            row["saliency"] = vec_to_json(sal.weights);
            row["degenerate"] = sal.degenerate;
            saliency_rows.push_back({clip.id, sal.weights});
        } else {
            throw xma::ConfigError("unknown manipulation kind '" + kind + "'");
        }
        rows.push_back(row);
    }

    Json report = xma::report_skeleton(config);
    report["command"] = "manipulate";
    report["experiments"] = rows;
    xma::write_json(args.out_path, report);
    const auto csv_path = sibling(args.out_path, ".saliency.csv");
    xma::write_saliency_csv(csv_path, saliency_rows);
    say(args, "wrote " + std::string(args.out_path) + " and " + csv_path.string() +
                  " (" + std::to_string(rows.size()) + " experiments)");
    return 0;
}

int run_ablation_grid(const CommonArgs& args) {
    const xma::ExperimentConfig config = resolve_config(args);
    const auto rows = xma::run_ablation_grid(config);

    std::filesystem::create_directories(args.out_path);
    const std::filesystem::path dir(args.out_path);
    xma::write_ablation_csv(dir / "ablation_grid.csv", rows);

    Json grid = Json::array();
    for (const auto& row : rows)
        grid.push_back(Json{{"loss_variant", row.loss},
                            {"pair_source", row.pair_source},
                            {"duration_timesteps", row.duration},
                            {"recall_at_1", row.recall1},
                            {"recall_at_5", row.recall5},
                            {"direct_recall_at_1", row.direct_recall1},
                            {"instance_recall_at_1", row.instance_recall1}});
    Json report = xma::report_skeleton(config);
    report["command"] = "ablation-grid";
    report["grid"] = grid;
    xma::write_json(dir / "ablation_grid.json", report);
    say(args, "wrote " + (dir / "ablation_grid.csv").string() + " (" +
                  std::to_string(rows.size()) + " rows)");
    return 0;
}

int fail(const char* type, const std::string& message, int code) {
    std::cerr << xma::error_json(type, message).dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-modal alignment laboratory"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string dataset_path, visual_path, audio_path, spec_path;
    std::string mode_name = "selected_top1";
    double threshold = xma::kDefaultLowConfidence;

    auto* synth = app.add_subcommand("synth-data", "generate a synthetic dataset");
    add_common(synth, args);

    auto* pretrain =
        app.add_subcommand("pretrain-visual", "train the frozen visual pair");
    add_common(pretrain, args);
    pretrain->add_option("--dataset", dataset_path, "dataset file")->required();

    auto* train = app.add_subcommand("train-audio", "train the audio encoder");
    add_common(train, args);
    train->add_option("--dataset", dataset_path, "dataset file")->required();
    train->add_option("--visual", visual_path, "visual checkpoint")->required();

    auto* select = app.add_subcommand("select-pairs", "annotate training moments");
    add_common(select, args, false);
    select->add_option("--dataset", dataset_path, "dataset file")->required();
    select->add_option("--mode", mode_name, "selected_top1 or mid_frame");
    select->add_option("--threshold", threshold, "low-confidence threshold");

    auto* evaluate = app.add_subcommand("evaluate", "run the evaluation suite");
    add_common(evaluate, args);
    evaluate->add_option("--dataset", dataset_path, "dataset file")->required();
    evaluate->add_option("--visual", visual_path, "visual checkpoint")->required();
    evaluate->add_option("--audio", audio_path, "audio checkpoint")->required();

    auto* gap = app.add_subcommand("gap-report", "modality-gap geometry report");
    add_common(gap, args);
    gap->add_option("--dataset", dataset_path, "dataset file")->required();
    gap->add_option("--visual", visual_path, "visual checkpoint")->required();
    gap->add_option("--audio", audio_path, "audio checkpoint")->required();

    auto* manipulate =
        app.add_subcommand("manipulate", "latent manipulation experiments");
    add_common(manipulate, args);
    manipulate->add_option("--dataset", dataset_path, "dataset file")->required();
    manipulate->add_option("--visual", visual_path, "visual checkpoint")->required();
    manipulate->add_option("--audio", audio_path, "audio checkpoint")->required();
    manipulate->add_option("--spec", spec_path, "experiment spec JSON");

    auto* grid = app.add_subcommand("ablation-grid", "loss/pairing/duration grid");
    add_common(grid, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("ConfigError", e.what(), 2);
    }

    try {
        if (synth->parsed()) return run_synth_data(args);
        if (pretrain->parsed()) return run_pretrain_visual(args, dataset_path);
        if (train->parsed()) return run_train_audio(args, dataset_path, visual_path);
        if (select->parsed())
            return run_select_pairs(args, dataset_path, mode_name, threshold);
        if (evaluate->parsed())
            return run_evaluate(args, dataset_path, visual_path, audio_path);
        if (gap->parsed())
            return run_gap_report(args, dataset_path, visual_path, audio_path);
        if (manipulate->parsed())
            return run_manipulate(args, dataset_path, visual_path, audio_path,
                                  spec_path);
        if (grid->parsed()) return run_ablation_grid(args);
        return fail("ConfigError", "no subcommand", 2);
    } catch (const xma::ConfigError& e) {
        return fail("ConfigError", e.what(), 2);
    } catch (const xma::IoError& e) {
        return fail("IoError", e.what(), 3);
    } catch (const xma::DegenerateInputError& e) {
        return fail("DegenerateInputError", e.what(), 4);
    } catch (const xma::NumericError& e) {
        return fail("NumericError", e.what(), 4);
    } catch (const xma::Error& e) {
        return fail("Error", e.what(), 1);
    } catch (const std::exception& e) {
        return fail("InternalError", e.what(), 1);
    }
}
