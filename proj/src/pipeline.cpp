#include "xma/pipeline.hpp"

#include <algorithm>

#include "xma/kernels.hpp"
#include "xma/pair_selection.hpp"
#include "xma/rng.hpp"

namespace xma {
namespace {

struct TestTables {
    std::vector<std::size_t> train, test;
    std::vector<MomentAnnotation> annotations;
    Matrix audio_test;  // queries
    Matrix visual_test; // paired targets
    std::vector<std::uint32_t> labels_train, labels_test;
};

TestTables test_tables(const Dataset& dataset, const Mlp& f_v,
                       const AudioEncoder& audio, const ExperimentConfig& config) {
    const SplitIndices splits = split_dataset(dataset.header);
    TestTables t;
    t.train = splits.train;
    t.test = splits.test;
    t.annotations = annotate_dataset(dataset, config.train.pair_source,
                                     config.selection_threshold);
    t.audio_test = audio_embeddings(audio, dataset, t.test, t.annotations,
                                    config.train.duration_timesteps);
    t.visual_test = visual_embeddings(f_v, dataset, t.test, t.annotations);
    t.labels_train = labels_of(dataset, t.train);
    t.labels_test = labels_of(dataset, t.test);
    return t;
}

} // namespace

TrainedModels train_models(const Dataset& dataset, const ExperimentConfig& config) {
    PretrainResult pre =
        pretrain_visual(dataset, config.dims(), config.pretrain(), config.seed);
    TrainResult aligned = train_audio_encoder(dataset, pre.visual, config.dims(),
                                              config.train, config.seed);
    TrainedModels models;
    models.visual = std::move(pre.visual);
    models.generator = std::move(pre.generator);
    models.audio = std::move(aligned.audio);
    models.pretrain_log = std::move(pre.log);
    models.train_log = std::move(aligned.log);
    return models;
}

double test_class_recall(const Dataset& dataset, const Mlp& f_v,
                         const AudioEncoder& audio, const ExperimentConfig& config,
                         std::size_t k) {
    const TestTables t = test_tables(dataset, f_v, audio, config);
    return recall_at_k(t.audio_test, t.visual_test, t.labels_test, t.labels_test, k,
                       RecallMode::Class);
}

double test_instance_recall(const Dataset& dataset, const Mlp& f_v,
                            const AudioEncoder& audio,
                            const ExperimentConfig& config, std::size_t k) {
    const TestTables t = test_tables(dataset, f_v, audio, config);
    return recall_at_k(t.audio_test, t.visual_test, t.labels_test, t.labels_test, k,
                       RecallMode::Instance);
}

EvalReport evaluate_model(const Dataset& dataset, const Mlp& f_v, const Mlp& g,
                          const AudioEncoder& audio, const ExperimentConfig& config) {
    const TestTables t = test_tables(dataset, f_v, audio, config);
    const std::size_t classes = dataset.header.classes;

    EvalReport report;
    report.classes = classes;
    report.queries = t.test.size();
    report.recall1_instance =
        recall_at_k(t.audio_test, t.visual_test, t.labels_test, t.labels_test, 1,
                    RecallMode::Instance);
    report.recall5_instance =
        recall_at_k(t.audio_test, t.visual_test, t.labels_test, t.labels_test, 5,
                    RecallMode::Instance);
    report.recall1_class =
        recall_at_k(t.audio_test, t.visual_test, t.labels_test, t.labels_test, 1,
                    RecallMode::Class);
    report.recall5_class =
        recall_at_k(t.audio_test, t.visual_test, t.labels_test, t.labels_test, 5,
                    RecallMode::Class);
    report.per_class_recall1 =
        per_class_recall(t.audio_test, t.visual_test, t.labels_test, t.labels_test, 1,
                         classes);

    const Matrix visual_train =
        visual_embeddings(f_v, dataset, t.train, t.annotations);
    ClassifierConfig clf_config;
    clf_config.epochs = config.eval_classifier_epochs;
    clf_config.lr = config.eval_classifier_lr;
    const Classifier clf =
        train_classifier(visual_train, t.labels_train, classes, clf_config);

    // Real test frames through the classifier bound the generated rows.
    const Matrix probs_real = classifier_probs(clf, t.visual_test);
    report.upper_bound_frames.top1 = classifier_recall(probs_real, t.labels_test, 1);
    report.upper_bound_frames.top5 = classifier_recall(probs_real, t.labels_test, 5);

    // Latent transfer: generate from the audio embedding at the central
    // noise vector, re-embed the generated frame, classify and retrieve.
    const Vec zero_noise(config.noise_dim, 0.0);
    Matrix generated_embed(t.test.size(), f_v.spec.output_dim());
    kernels::for_each_index(t.test.size(), [&](std::size_t i) {
        const Vec frame = generate(g, zero_noise, t.audio_test.row_vec(i));
        generated_embed.set_row(i, forward_visual(f_v, frame));
    });
    const Matrix probs_generated = classifier_probs(clf, generated_embed);
    report.generated_from_audio.top1 =
        classifier_recall(probs_generated, t.labels_test, 1);
    report.generated_from_audio.top5 =
        classifier_recall(probs_generated, t.labels_test, 5);
    report.recall1_generated =
        recall_at_k(generated_embed, t.visual_test, t.labels_test, t.labels_test, 1,
                    RecallMode::Class);
    report.recall5_generated =
        recall_at_k(generated_embed, t.visual_test, t.labels_test, t.labels_test, 5,
                    RecallMode::Class);

    // Retrieval baseline: nearest train frame in embedding space, then
    // classify the retrieved embedding against the query's label.
    const Matrix qn = kernels::normalize_rows(t.audio_test);
    const Matrix dbn = kernels::normalize_rows(visual_train);
    const Matrix dist = kernels::pairwise_l2(qn, dbn);
    Matrix retrieved(t.test.size(), visual_train.cols);
    kernels::for_each_index(t.test.size(), [&](std::size_t q) {
        const double* row = dist.row(q);
        std::size_t best = 0;
        for (std::size_t j = 1; j < visual_train.rows; ++j)
            if (row[j] < row[best]) best = j;
        retrieved.set_row(q, visual_train.row_vec(best));
    });
    const Matrix probs_retrieved = classifier_probs(clf, retrieved);
    report.retrieval_baseline.top1 =
        classifier_recall(probs_retrieved, t.labels_test, 1);
    report.retrieval_baseline.top5 =
        classifier_recall(probs_retrieved, t.labels_test, 5);

    report.frechet = frechet_distance(t.visual_test, generated_embed);
    report.score = score_analog(probs_generated, config.eval_is_splits);
    return report;
}

GapArtifacts gap_artifacts(const Dataset& dataset, const Mlp& f_v,
                           const AudioEncoder& audio, const ExperimentConfig& config) {
    const TestTables t = test_tables(dataset, f_v, audio, config);
    GapArtifacts out;
    out.report = gap_report(t.visual_test, t.audio_test);
    out.projection = project_2d(t.visual_test, t.audio_test);
    out.labels = t.labels_test;
    return out;
}

std::vector<ExperimentConfig> ablation_grid_configs(const ExperimentConfig& base) {
    const std::size_t full = base.dataset.timesteps;
    const std::size_t half = std::min<std::size_t>(10, full);
    const std::size_t minimal = std::min<std::size_t>(2, full);

    auto row = [&base](const LossVariant& variant, PairSource source,
                       std::size_t duration) {
        ExperimentConfig c = base;
        c.dataset.seed = base.seed;
        c.train.variant = variant;
        c.train.pair_source = source;
        c.train.duration_timesteps = duration;
        return c;
    };

    return {
        row(LossVariant::total(), PairSource::SelectedTop1, full),
        row(LossVariant::nce_cosine(base.train.variant.temperature),
            PairSource::SelectedTop1, full),
        row(LossVariant::l2_only(), PairSource::SelectedTop1, full),
        row(LossVariant::total(), PairSource::MidFrame, full),
        row(LossVariant::total(), PairSource::SelectedTop1, half),
        row(LossVariant::total(), PairSource::SelectedTop1, minimal),
    };
}

std::vector<AblationRow> run_ablation_grid(const ExperimentConfig& base) {
    ExperimentConfig root = base;
    root.dataset.seed = base.seed;
    const Dataset dataset = synth_dataset(root.dataset);

    // The frozen visual pair depends only on the dataset and seed, so one
    // pretraining serves every row.
    PretrainResult pre =
        pretrain_visual(dataset, root.dims(), root.pretrain(), root.seed);

    std::vector<AblationRow> rows;
    for (const ExperimentConfig& cfg : ablation_grid_configs(root)) {
        TrainResult aligned = train_audio_encoder(dataset, pre.visual, cfg.dims(),
                                                  cfg.train, cfg.seed);
        const EvalReport eval =
            evaluate_model(dataset, pre.visual, pre.generator, aligned.audio, cfg);
        AblationRow row;
        row.loss = loss_variant_name(cfg.train.variant);
        row.pair_source = pair_source_name(cfg.train.pair_source);
        row.duration = cfg.train.duration_timesteps;
        row.recall1 = eval.recall1_generated;
        row.recall5 = eval.recall5_generated;
        row.direct_recall1 = eval.recall1_class;
        row.instance_recall1 = eval.recall1_instance;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace xma
