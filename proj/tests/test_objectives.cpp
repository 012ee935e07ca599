#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "xma/embedding.hpp"
#include "xma/errors.hpp"
#include "xma/objectives.hpp"
#include "xma/rng.hpp"

using namespace xma;

namespace {

// Brute-force reference: normalizes where the contract says so, then sums
// every denominator term directly, with no shared code or max subtraction.

Matrix brute_normalize(const Matrix& m) {
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows; ++r)
        out.set_row(r, unit_normalize(m.row_vec(r)));
    return out;
}

double brute_term(std::size_t j, const Matrix& anchors, const Matrix& candidates,
                  bool cosine, double tau) {
    auto dist = [&](const Vec& a, const Vec& b) {
        return cosine ? (1.0 - cosine_similarity(a, b)) / tau : l2_distance(a, b);
    };
    const Vec a = anchors.row_vec(j);
    double denom = 0.0;
    for (std::size_t k = 0; k < candidates.rows; ++k)
        denom += std::exp(-dist(a, candidates.row_vec(k)));
    return dist(a, candidates.row_vec(j)) + std::log(denom);
}

double brute_loss(const Matrix& audio, const Matrix& visual,
                  const LossVariant& variant) {
    const std::size_t b = audio.rows;
    if (variant.tag == LossVariantTag::L2Only) {
        double acc = 0.0;
        for (std::size_t j = 0; j < b; ++j)
            acc += l2_distance(audio.row_vec(j), visual.row_vec(j));
        return acc / double(b);
    }
    const bool cosine = variant.tag == LossVariantTag::NceCosine;
    const Matrix a = brute_normalize(audio);
    const Matrix v = brute_normalize(visual);
    double acc = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        acc += brute_term(j, a, v, cosine, variant.temperature);
        acc += brute_term(j, v, a, cosine, variant.temperature);
    }
    return acc / double(2 * b);
}

double gradcheck_worst(const LossVariant& variant, std::uint64_t seed,
                       std::size_t b, std::size_t d) {
    Rng rng(seed);
    Matrix audio = test::random_matrix(b, d, rng);
    Matrix visual = test::random_matrix(b, d, rng);
    const LossResult res = loss_total(audio, visual, variant);
    const double step = 1e-5;
    double worst = 0.0;
    auto probe = [&](Matrix& side, const Matrix& grads) {
        for (std::size_t i = 0; i < side.data.size(); ++i) {
            const double saved = side.data[i];
            side.data[i] = saved + step;
            const double up = loss_total(audio, visual, variant).value;
            side.data[i] = saved - step;
            const double down = loss_total(audio, visual, variant).value;
            side.data[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = grads.data[i];
            const double rel = std::abs(analytic - numeric) /
                               std::max({1.0, std::abs(analytic), std::abs(numeric)});
            worst = std::max(worst, rel);
        }
    };
    probe(audio, res.grad_audio);
    probe(visual, res.grad_visual);
    return worst;
}

} // namespace

TEST_CASE("infonce_term is zero for a single candidate") {
    Rng rng(51);
    const Matrix a = brute_normalize(test::random_matrix(1, 4, rng));
    CHECK(infonce_term(0, a, a, DistanceKind::L2) == doctest::Approx(0.0));
}

TEST_CASE("infonce_term equals log N when all candidates coincide") {
    Matrix anchors(4, 3);
    Matrix candidates(4, 3);
    for (std::size_t r = 0; r < 4; ++r) {
        anchors.set_row(r, {1.0, 0.0, 0.0});
        candidates.set_row(r, {1.0, 0.0, 0.0});
    }
    CHECK(infonce_term(0, anchors, candidates, DistanceKind::L2) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("infonce_term matches the enumeration oracle") {
    Rng rng(52);
    const Matrix anchors = brute_normalize(test::random_matrix(3, 5, rng));
    const Matrix candidates = brute_normalize(test::random_matrix(3, 5, rng));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(infonce_term(j, anchors, candidates, DistanceKind::L2) ==
              doctest::Approx(brute_term(j, anchors, candidates, false, 1.0))
                  .epsilon(1e-10));
        CHECK(infonce_term(j, anchors, candidates, DistanceKind::Cosine, 0.7) ==
              doctest::Approx(brute_term(j, anchors, candidates, true, 0.7))
                  .epsilon(1e-10));
    }
}

TEST_CASE("infonce_term validates its arguments") {
    const Matrix a(2, 3);
    const Matrix wrong_rows(3, 3);
    const Matrix wrong_cols(2, 4);
    CHECK_THROWS_AS(infonce_term(2, a, a, DistanceKind::L2), ShapeError);
    CHECK_THROWS_AS(infonce_term(0, a, wrong_rows, DistanceKind::L2), ShapeError);
    CHECK_THROWS_AS(infonce_term(0, a, wrong_cols, DistanceKind::L2), ShapeError);
}

TEST_CASE("infonce_term never dips below -1e-12") {
    Rng rng(53);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 1 + rng.below(6);
        const Matrix anchors = brute_normalize(test::random_matrix(n, 4, rng));
        const Matrix candidates = brute_normalize(test::random_matrix(n, 4, rng));
        for (std::size_t j = 0; j < n; ++j)
            CHECK(infonce_term(j, anchors, candidates, DistanceKind::L2) >= -1e-12);
    }
}

TEST_CASE("loss_audio_centric known values") {
    Rng rng(54);
    const Matrix one = brute_normalize(test::random_matrix(1, 6, rng));
    CHECK(loss_audio_centric(one, one) == doctest::Approx(0.0));

    Matrix same(8, 2);
    for (std::size_t r = 0; r < 8; ++r) same.set_row(r, {0.0, 1.0});
    CHECK(loss_audio_centric(same, same) ==
          doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("loss_total matches the enumeration oracle for every variant") {
    Rng rng(55);
    for (const LossVariant& variant :
         {LossVariant::total(), LossVariant::nce_cosine(1.0),
          LossVariant::nce_cosine(0.37), LossVariant::l2_only()}) {
        for (int i = 0; i < 20; ++i) {
            const std::size_t b = 1 + rng.below(8);
            const std::size_t d = 2 + rng.below(15);
            const Matrix audio = test::random_matrix(b, d, rng);
            const Matrix visual = test::random_matrix(b, d, rng);
            const double expected = brute_loss(audio, visual, variant);
            CHECK(loss_total(audio, visual, variant).value ==
                  doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("loss_total under TOTAL_L2NCE is exactly argument-swap symmetric") {
    Rng rng(56);
    for (int i = 0; i < 10; ++i) {
        const Matrix audio = test::random_matrix(5, 7, rng);
        const Matrix visual = test::random_matrix(5, 7, rng);
        const LossResult fwd = loss_total(audio, visual, LossVariant::total());
        const LossResult swapped = loss_total(visual, audio, LossVariant::total());
        CHECK(fwd.value == swapped.value);
        CHECK(fwd.grad_audio == swapped.grad_visual);
        CHECK(fwd.grad_visual == swapped.grad_audio);
    }
}

TEST_CASE("analytic gradients match central differences") {
    double worst = 0.0;
    int batches = 0;
    for (const LossVariant& variant :
         {LossVariant::total(), LossVariant::nce_cosine(1.0),
          LossVariant::l2_only()}) {
        for (std::uint64_t seed = 1; seed <= 7; ++seed) {
            Rng shape_rng(seed * 977);
            const std::size_t b = 2 + shape_rng.below(7);
            const std::size_t d = 2 + shape_rng.below(15);
            worst = std::max(worst, gradcheck_worst(variant, seed, b, d));
            ++batches;
        }
    }
    CHECK(batches >= 20);
    CHECK(worst <= 1e-4);
}

TEST_CASE("permuting paired rows permutes gradients and keeps the value") {
    Rng rng(57);
    const std::size_t b = 6;
    const Matrix audio = test::random_matrix(b, 5, rng);
    const Matrix visual = test::random_matrix(b, 5, rng);
    std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};

    for (const LossVariant& variant :
         {LossVariant::total(), LossVariant::nce_cosine(1.0),
          LossVariant::l2_only()}) {
        Matrix audio_p(b, 5), visual_p(b, 5);
        for (std::size_t r = 0; r < b; ++r) {
            audio_p.set_row(r, audio.row_vec(perm[r]));
            visual_p.set_row(r, visual.row_vec(perm[r]));
        }
        const LossResult base = loss_total(audio, visual, variant);
        const LossResult permuted = loss_total(audio_p, visual_p, variant);
        CHECK(permuted.value == doctest::Approx(base.value).epsilon(1e-12));
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = 0; c < 5; ++c) {
                CHECK(permuted.grad_audio.at(r, c) ==
                      doctest::Approx(base.grad_audio.at(perm[r], c)).epsilon(1e-12));
                CHECK(permuted.grad_visual.at(r, c) ==
                      doctest::Approx(base.grad_visual.at(perm[r], c)).epsilon(1e-12));
            }
    }
}

TEST_CASE("translating raw audio changes the cosine loss") {
    Rng rng(58);
    const Matrix audio = test::random_matrix(4, 6, rng);
    const Matrix visual = test::random_matrix(4, 6, rng);
    Matrix shifted = audio;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 6; ++c) shifted.at(r, c) += (c == 0 ? 2.5 : 0.0);
    const double before = loss_total(audio, visual, LossVariant::nce_cosine(1.0)).value;
    const double after = loss_total(shifted, visual, LossVariant::nce_cosine(1.0)).value;
    CHECK(std::abs(before - after) > 1e-6);
}

TEST_CASE("L2_ONLY on identical batches is zero with zero gradients") {
    Rng rng(59);
    const Matrix z = test::random_matrix(5, 4, rng);
    const LossResult res = loss_total(z, z, LossVariant::l2_only());
    CHECK(res.value == 0.0);
    for (double g : res.grad_audio.data) CHECK(g == 0.0);
    for (double g : res.grad_visual.data) CHECK(g == 0.0);
}

TEST_CASE("loss_total rejects malformed inputs") {
    const Matrix a(3, 4);
    const Matrix b(2, 4);
    CHECK_THROWS_AS(loss_total(a, b, LossVariant::total()), ShapeError);
    Matrix nan_side(3, 4);
    nan_side.at(0, 0) = std::nan("");
    Matrix ones(3, 4);
    for (auto& x : ones.data) x = 1.0;
    CHECK_THROWS_AS(loss_total(nan_side, ones, LossVariant::total()), NumericError);
}

TEST_CASE("temperature rescales the cosine distances") {
    Rng rng(60);
    const Matrix audio = test::random_matrix(4, 5, rng);
    const Matrix visual = test::random_matrix(4, 5, rng);
    const double at_1 = loss_total(audio, visual, LossVariant::nce_cosine(1.0)).value;
    const double at_half = loss_total(audio, visual, LossVariant::nce_cosine(0.5)).value;
    CHECK(std::abs(at_1 - at_half) > 1e-9);
    CHECK(at_half == doctest::Approx(brute_loss(audio, visual,
                                                LossVariant::nce_cosine(0.5)))
                         .epsilon(1e-10));
}
