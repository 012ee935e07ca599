#include "xma/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xma/errors.hpp"
#include "xma/kernels.hpp"
#include "xma/linalg.hpp"

namespace xma {
namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kCovRidge = 1e-6;

std::vector<std::size_t> top_k_by_distance(const double* dist, std::size_t n,
                                           std::size_t k) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const std::size_t take = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + std::ptrdiff_t(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (dist[a] != dist[b]) return dist[a] < dist[b];
                          return a < b;
                      });
    order.resize(take);
    return order;
}

// Per-query hit flags for class or instance matching.
std::vector<char> recall_hits(const Matrix& queries, const Matrix& database,
                              const std::vector<std::uint32_t>& query_labels,
                              const std::vector<std::uint32_t>& database_labels,
                              std::size_t k, RecallMode mode) {
    if (database.rows == 0) throw ShapeError("empty retrieval database");
    if (queries.cols != database.cols)
        throw ShapeError("query and database dimensions differ");
    if (k == 0) throw ConfigError("recall needs k >= 1");
    if (mode == RecallMode::Instance && queries.rows != database.rows)
        throw ShapeError("instance-level recall needs one database row per query");
    if (mode == RecallMode::Class &&
        (query_labels.size() != queries.rows || database_labels.size() != database.rows))
        throw ShapeError("label counts do not match row counts");

    const Matrix qn = kernels::normalize_rows(queries);
    const Matrix dn = kernels::normalize_rows(database);
    const Matrix dist = kernels::pairwise_l2(qn, dn);

    std::vector<char> hits(queries.rows, 0);
    kernels::for_each_index(queries.rows, [&](std::size_t q) {
        const auto top = top_k_by_distance(dist.row(q), database.rows, k);
        for (std::size_t idx : top) {
            const bool hit = mode == RecallMode::Instance
                                 ? idx == q
                                 : database_labels[idx] == query_labels[q];
            if (hit) {
                hits[q] = 1;
                break;
            }
        }
    });
    return hits;
}

} // namespace

double recall_at_k(const Matrix& queries, const Matrix& database,
                   const std::vector<std::uint32_t>& query_labels,
                   const std::vector<std::uint32_t>& database_labels, std::size_t k,
                   RecallMode mode) {
    const auto hits =
        recall_hits(queries, database, query_labels, database_labels, k, mode);
    std::size_t n = 0;
    for (char h : hits) n += std::size_t(h);
    return double(n) / double(hits.size());
}

Vec per_class_recall(const Matrix& queries, const Matrix& database,
                     const std::vector<std::uint32_t>& query_labels,
                     const std::vector<std::uint32_t>& database_labels, std::size_t k,
                     std::size_t classes) {
    const auto hits =
        recall_hits(queries, database, query_labels, database_labels, k, RecallMode::Class);
    Vec sums(classes, 0.0), counts(classes, 0.0);
    for (std::size_t q = 0; q < hits.size(); ++q) {
        if (query_labels[q] >= classes) throw ShapeError("label out of range");
        sums[query_labels[q]] += double(hits[q]);
        counts[query_labels[q]] += 1.0;
    }
    Vec out(classes);
    for (std::size_t c = 0; c < classes; ++c)
        out[c] = counts[c] > 0.0 ? sums[c] / counts[c] : -1.0;
    return out;
}

Classifier train_classifier(const Matrix& embeddings,
                            const std::vector<std::uint32_t>& labels,
                            std::size_t classes, const ClassifierConfig& config) {
    if (embeddings.rows == 0) throw ShapeError("no training embeddings");
    if (labels.size() != embeddings.rows)
        throw ShapeError("label count does not match embedding rows");
    for (std::uint32_t l : labels)
        if (l >= classes) throw ShapeError("label out of range");

    Classifier clf{Matrix(classes, embeddings.cols), Vec(classes, 0.0)};
    const double n = double(embeddings.rows);
    Matrix dw(classes, embeddings.cols);
    Vec db(classes);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const Matrix probs = classifier_probs(clf, embeddings);
        std::fill(dw.data.begin(), dw.data.end(), 0.0);
        std::fill(db.begin(), db.end(), 0.0);
        for (std::size_t i = 0; i < embeddings.rows; ++i) {
            const double* x = embeddings.row(i);
            for (std::size_t c = 0; c < classes; ++c) {
                const double err =
                    (probs.at(i, c) - (labels[i] == c ? 1.0 : 0.0)) / n;
                db[c] += err;
                double* dwr = dw.row(c);
                for (std::size_t j = 0; j < embeddings.cols; ++j)
                    dwr[j] += err * x[j];
            }
        }
        for (std::size_t i = 0; i < clf.weights.data.size(); ++i)
            clf.weights.data[i] -= config.lr * dw.data[i];
        for (std::size_t c = 0; c < classes; ++c) clf.biases[c] -= config.lr * db[c];
    }
    return clf;
}

Matrix classifier_probs(const Classifier& clf, const Matrix& embeddings) {
    if (embeddings.cols != clf.weights.cols)
        throw ShapeError("embedding dimension does not match classifier");
    const std::size_t classes = clf.weights.rows;
    Matrix probs(embeddings.rows, classes);
    kernels::for_each_index(embeddings.rows, [&](std::size_t i) {
        const double* x = embeddings.row(i);
        double max_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < classes; ++c) {
            double s = clf.biases[c];
            const double* w = clf.weights.row(c);
            for (std::size_t j = 0; j < embeddings.cols; ++j) s += w[j] * x[j];
            probs.at(i, c) = s;
            max_score = std::max(max_score, s);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            probs.at(i, c) = std::exp(probs.at(i, c) - max_score);
            sum += probs.at(i, c);
        }
        for (std::size_t c = 0; c < classes; ++c) probs.at(i, c) /= sum;
    });
    return probs;
}

double classifier_recall(const Matrix& probs,
                         const std::vector<std::uint32_t>& labels, std::size_t k) {
    if (labels.size() != probs.rows)
        throw ShapeError("label count does not match probability rows");
    if (k == 0) throw ConfigError("recall needs k >= 1");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        if (labels[i] >= probs.cols) throw ShapeError("label out of range");
        Vec neg(probs.cols);
        for (std::size_t c = 0; c < probs.cols; ++c) neg[c] = -probs.at(i, c);
        const auto top = top_k_by_distance(neg.data(), probs.cols, k);
        for (std::size_t c : top)
            if (c == labels[i]) {
                ++hits;
                break;
            }
    }
    return double(hits) / double(probs.rows);
}

namespace {

// S^{1/2} via eigendecomposition, clamping tiny negative eigenvalues.
Matrix matrix_sqrt(const Matrix& s, double* clamped_mass) {
    const EigenDecomposition eig = symmetric_eigen(s);
    const std::size_t n = s.rows;
    Matrix scaled(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double lambda = eig.values[i];
        if (lambda < 0.0) {
            *clamped_mass += -lambda;
            lambda = 0.0;
        }
        const double root = std::sqrt(lambda);
        for (std::size_t r = 0; r < n; ++r)
            scaled.at(r, i) = eig.vectors.at(r, i) * root;
    }
    return matmul(scaled, transpose(eig.vectors));
}

} // namespace

FrechetResult frechet_distance(const Matrix& real_features,
                               const Matrix& generated_features) {
    if (real_features.cols != generated_features.cols)
        throw ShapeError("feature dimensions differ");
    if (real_features.rows == 0 || generated_features.rows == 0)
        throw ShapeError("empty feature set");
    require_finite(real_features, "real features");
    require_finite(generated_features, "generated features");

    FrechetResult out;
    const bool ridge1 = real_features.rows <= real_features.cols;
    const bool ridge2 = generated_features.rows <= generated_features.cols;
    out.ridged = ridge1 || ridge2;
    const Vec mu1 = column_mean(real_features);
    const Vec mu2 = column_mean(generated_features);
    const Matrix s1 = covariance(real_features, ridge1 ? kCovRidge : 0.0);
    const Matrix s2 = covariance(generated_features, ridge2 ? kCovRidge : 0.0);
    require_finite(s1, "covariance");
    require_finite(s2, "covariance");

    double mean_term = 0.0;
    for (std::size_t i = 0; i < mu1.size(); ++i) {
        const double d = mu1[i] - mu2[i];
        mean_term += d * d;
    }

    const Matrix root1 = matrix_sqrt(s1, &out.clamped_mass);
    Matrix middle = matmul(matmul(root1, s2), root1);
    for (std::size_t i = 0; i < middle.rows; ++i)
        for (std::size_t j = i + 1; j < middle.cols; ++j) {
            const double sym = 0.5 * (middle.at(i, j) + middle.at(j, i));
            middle.at(i, j) = sym;
            middle.at(j, i) = sym;
        }
    const EigenDecomposition eig = symmetric_eigen(middle);
    double trace_sqrt = 0.0;
    for (double lambda : eig.values) {
        if (lambda < 0.0) {
            out.clamped_mass += -lambda;
            continue;
        }
        trace_sqrt += std::sqrt(lambda);
    }
    double trace12 = 0.0;
    for (std::size_t i = 0; i < s1.rows; ++i) trace12 += s1.at(i, i) + s2.at(i, i);

    out.value = std::max(0.0, mean_term + trace12 - 2.0 * trace_sqrt);
    return out;
}

double score_analog(const Matrix& prob_rows, std::size_t splits) {
    if (splits == 0) throw ConfigError("need at least one split");
    if (prob_rows.rows < splits)
        throw ShapeError("fewer probability rows than splits");
    for (std::size_t i = 0; i < prob_rows.rows; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < prob_rows.cols; ++c) {
            const double p = prob_rows.at(i, c);
            if (!(p >= 0.0)) throw NumericError("negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw NumericError("probability row does not sum to 1");
    }

    Matrix floored = prob_rows;
    for (std::size_t i = 0; i < floored.rows; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < floored.cols; ++c) {
            floored.at(i, c) = std::max(floored.at(i, c), kProbFloor);
            sum += floored.at(i, c);
        }
        for (std::size_t c = 0; c < floored.cols; ++c) floored.at(i, c) /= sum;
    }

    double total = 0.0;
    for (std::size_t s = 0; s < splits; ++s) {
        const std::size_t begin = s * floored.rows / splits;
        const std::size_t end = (s + 1) * floored.rows / splits;
        const std::size_t n = end - begin;
        Vec marginal(floored.cols, 0.0);
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t c = 0; c < floored.cols; ++c)
                marginal[c] += floored.at(i, c) / double(n);
        double mean_kl = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            double kl = 0.0;
            for (std::size_t c = 0; c < floored.cols; ++c) {
                const double p = floored.at(i, c);
                kl += p * (std::log(p) - std::log(marginal[c]));
            }
            mean_kl += kl / double(n);
        }
        total += std::exp(std::max(0.0, mean_kl));
    }
    return total / double(splits);
}

} // namespace xma
