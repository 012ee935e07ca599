#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "xma/errors.hpp"
#include "xma/mlp.hpp"
#include "xma/rng.hpp"

using namespace xma;

namespace {

NetworkSpec small_spec() {
    return {{3, 5, 2}, Activation::Relu, InputKind::FlatVector};
}

// Layer-by-layer oracle with explicit loops, no shared code with the
// library's forward pass.
Vec oracle_forward(const Mlp& net, const Vec& in) {
    Vec cur = in;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const Matrix& w = net.weights[l];
        Vec next(w.rows);
        for (std::size_t r = 0; r < w.rows; ++r) {
            double acc = net.biases[l][r];
            for (std::size_t c = 0; c < w.cols; ++c) acc += w.at(r, c) * cur[c];
            next[r] = acc;
        }
        const bool activated = l + 1 < net.weights.size() || net.activate_final;
        if (activated)
            for (double& v : next)
                v = net.spec.activation == Activation::Relu ? std::max(0.0, v)
                                                            : std::tanh(v);
        cur = std::move(next);
    }
    return cur;
}

} // namespace

TEST_CASE("make_mlp shapes follow the spec and draws are deterministic") {
    Rng rng_a(7);
    Rng rng_b(7);
    const Mlp a = make_mlp(small_spec(), rng_a);
    const Mlp b = make_mlp(small_spec(), rng_b);
    REQUIRE(a.weights.size() == 2);
    CHECK(a.weights[0].rows == 5);
    CHECK(a.weights[0].cols == 3);
    CHECK(a.weights[1].rows == 2);
    CHECK(a.weights[1].cols == 5);
    CHECK(params_checksum(a) == params_checksum(b));
}

TEST_CASE("zero-weight network maps everything to zero") {
    Rng rng(8);
    Mlp net = make_mlp(small_spec(), rng);
    for (auto& w : net.weights)
        for (auto& v : w.data) v = 0.0;
    const Vec out = mlp_forward(net, {1.0, -2.0, 3.0});
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("identity single layer with RELU passes nonnegative inputs through") {
    Mlp net;
    net.spec = {{3, 3}, Activation::Relu, InputKind::FlatVector};
    net.activate_final = true;
    Matrix w(3, 3);
    for (std::size_t i = 0; i < 3; ++i) w.at(i, i) = 1.0;
    net.weights.push_back(w);
    net.biases.push_back(Vec(3, 0.0));
    const Vec in{0.5, 0.0, 2.0};
    const Vec out = mlp_forward(net, in);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("forward matches the layer-by-layer oracle") {
    Rng rng(9);
    for (Activation act : {Activation::Relu, Activation::Tanh}) {
        NetworkSpec spec{{4, 6, 5, 3}, act, InputKind::FlatVector};
        const Mlp net = make_mlp(spec, rng, act == Activation::Relu);
        for (int i = 0; i < 20; ++i) {
            const Vec in = test::random_vec(4, rng);
            const Vec got = mlp_forward(net, in);
            const Vec want = oracle_forward(net, in);
            for (std::size_t j = 0; j < got.size(); ++j)
                CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward rejects wrong input width") {
    Rng rng(10);
    const Mlp net = make_mlp(small_spec(), rng);
    CHECK_THROWS_AS(mlp_forward(net, Vec(4, 0.0)), ShapeError);
}

TEST_CASE("batch forward equals per-row forward bit for bit") {
    Rng rng(11);
    const Mlp net = make_mlp(small_spec(), rng);
    const Matrix in = test::random_matrix(17, 3, rng);
    const Matrix out = mlp_forward_batch(net, in);
    for (std::size_t r = 0; r < in.rows; ++r) {
        const Vec row = mlp_forward(net, in.row_vec(r));
        for (std::size_t c = 0; c < row.size(); ++c) CHECK(out.at(r, c) == row[c]);
    }
}

TEST_CASE("backward gradients match central finite differences") {
    Rng rng(12);
    for (Activation act : {Activation::Tanh, Activation::Relu}) {
        NetworkSpec spec{{3, 4, 2}, act, InputKind::FlatVector};
        Mlp net = make_mlp(spec, rng);
        const Vec in = test::random_vec(3, rng);
        const Vec d_out{0.7, -1.3};

        const ForwardTrace trace = mlp_forward_trace(net, in);
        MlpGrads grads(net);
        grads.zero();
        const Vec d_in = mlp_backward(net, trace, d_out, &grads);

        // Scalar objective sum(d_out . f(x)) probed coordinate-wise.
        const double step = 1e-6;
        auto objective = [&]() {
            const Vec out = mlp_forward(net, in);
            return d_out[0] * out[0] + d_out[1] * out[1];
        };
        for (std::size_t l = 0; l < net.weights.size(); ++l)
            for (std::size_t i = 0; i < net.weights[l].data.size(); ++i) {
                double& p = net.weights[l].data[i];
                const double saved = p;
                p = saved + step;
                const double up = objective();
                p = saved - step;
                const double down = objective();
                p = saved;
                CHECK(grads.weights[l].data[i] ==
                      doctest::Approx((up - down) / (2 * step)).epsilon(1e-5));
            }
        for (std::size_t l = 0; l < net.biases.size(); ++l)
            for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
                double& p = net.biases[l][i];
                const double saved = p;
                p = saved + step;
                const double up = objective();
                p = saved - step;
                const double down = objective();
                p = saved;
                CHECK(grads.biases[l][i] ==
                      doctest::Approx((up - down) / (2 * step)).epsilon(1e-5));
            }

        // Input gradient through the same probe.
        Vec in_probe = in;
        for (std::size_t i = 0; i < in.size(); ++i) {
            const double saved = in_probe[i];
            in_probe[i] = saved + step;
            const Vec up = mlp_forward(net, in_probe);
            in_probe[i] = saved - step;
            const Vec down = mlp_forward(net, in_probe);
            in_probe[i] = saved;
            const double numeric =
                (d_out[0] * (up[0] - down[0]) + d_out[1] * (up[1] - down[1])) /
                (2 * step);
            CHECK(d_in[i] == doctest::Approx(numeric).epsilon(1e-5));
        }
    }
}

TEST_CASE("one Adam step matches the closed-form update") {
    Rng rng(13);
    Mlp net = make_mlp(small_spec(), rng);
    const Mlp before = net;
    AdamConfig cfg;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.1;
    AdamState state(net, cfg);
    MlpGrads grads(net);
    grads.zero();
    for (auto& g : grads.weights)
        for (auto& v : g.data) v = rng.normal();
    for (auto& g : grads.biases)
        for (auto& v : g) v = rng.normal();

    adam_step(net, grads, state);
    CHECK(state.step == 1);

    // After the first step m-hat = g and v-hat = g^2 exactly.
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        for (std::size_t i = 0; i < net.weights[l].data.size(); ++i) {
            const double g = grads.weights[l].data[i];
            const double p0 = before.weights[l].data[i];
            const double want =
                p0 - cfg.lr * (g / (std::abs(g) + cfg.eps) + cfg.weight_decay * p0);
            CHECK(net.weights[l].data[i] == doctest::Approx(want).epsilon(1e-12));
        }
    for (std::size_t l = 0; l < net.biases.size(); ++l)
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            const double g = grads.biases[l][i];
            const double p0 = before.biases[l][i];
            const double want =
                p0 - cfg.lr * (g / (std::abs(g) + cfg.eps) + cfg.weight_decay * p0);
            CHECK(net.biases[l][i] == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("Adam refuses to touch a frozen network") {
    Rng rng(14);
    Mlp net = make_mlp(small_spec(), rng);
    AdamState state(net, AdamConfig{});
    MlpGrads grads(net);
    grads.zero();
    net.frozen = true;
    CHECK_THROWS_AS(adam_step(net, grads, state), ConfigError);
}

TEST_CASE("params_checksum changes when any parameter changes") {
    Rng rng(15);
    Mlp net = make_mlp(small_spec(), rng);
    const std::uint64_t before = params_checksum(net);
    net.biases[1][0] += 1e-9;
    CHECK(params_checksum(net) != before);
}
