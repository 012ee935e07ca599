#pragma once

#include <cstdint>
#include <vector>

#include "xma/embedding.hpp"

namespace xma {

enum class RecallMode : std::uint8_t { Instance = 0, Class = 1 };

// Fraction of queries whose top-k database rows (L2 on unit-normalized
// copies, ties by database index) contain a correct match. Instance mode
// counts row i of the database as the match of query i; class mode counts
// any label match.
double recall_at_k(const Matrix& queries, const Matrix& database,
                   const std::vector<std::uint32_t>& query_labels,
                   const std::vector<std::uint32_t>& database_labels, std::size_t k,
                   RecallMode mode);

// Class-level R@k split by query label; classes with no queries report -1.
Vec per_class_recall(const Matrix& queries, const Matrix& database,
                     const std::vector<std::uint32_t>& query_labels,
                     const std::vector<std::uint32_t>& database_labels, std::size_t k,
                     std::size_t classes);

// Linear softmax head over embeddings, trained by full-batch gradient
// descent on the cross-entropy. Labels are evaluation-only artifacts.
struct Classifier {
    Matrix weights; // classes x dim
    Vec biases;     // classes
};

struct ClassifierConfig {
    std::size_t epochs = 300;
    double lr = 0.5;
};

Classifier train_classifier(const Matrix& embeddings,
                            const std::vector<std::uint32_t>& labels,
                            std::size_t classes, const ClassifierConfig& config);

// Softmax probability rows, one per embedding row.
Matrix classifier_probs(const Classifier& clf, const Matrix& embeddings);

// Fraction of rows whose true class is among the k largest scores (ties by
// class index).
double classifier_recall(const Matrix& probs,
                         const std::vector<std::uint32_t>& labels, std::size_t k);

struct FrechetResult {
    double value = 0.0;
    double clamped_mass = 0.0; // total eigenvalue mass removed by PSD clamping
    bool ridged = false;       // covariance ridge applied (rows <= dims)
};

// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}) on Gaussian fits of the
// two feature sets; population covariances, ridge 1e-6 when a set has no
// more rows than dimensions.
FrechetResult frechet_distance(const Matrix& real_features,
                               const Matrix& generated_features);

// exp(mean KL(p(y|x) || p(y))) averaged over contiguous splits; rows are
// floored at 1e-12 and renormalized before use.
double score_analog(const Matrix& prob_rows, std::size_t splits);

struct BaselineRow {
    double top1 = 0.0;
    double top5 = 0.0;
};

struct EvalReport {
    double recall1_instance = 0.0;
    double recall5_instance = 0.0;
    double recall1_class = 0.0;
    double recall5_class = 0.0;
    // Class-level retrieval of generated-frame embeddings against the real
    // test frames, the Table-2-style generation metric.
    double recall1_generated = 0.0;
    double recall5_generated = 0.0;
    Vec per_class_recall1;
    FrechetResult frechet;
    double score = 1.0;
    BaselineRow generated_from_audio;
    BaselineRow retrieval_baseline;
    BaselineRow upper_bound_frames;
    std::size_t classes = 0;
    std::size_t queries = 0;
};

} // namespace xma
