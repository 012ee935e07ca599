#include "xma/mlp.hpp"

#include <cmath>
#include <cstring>

#include "xma/errors.hpp"
#include "xma/kernels.hpp"

namespace xma {
namespace {

double activate(Activation act, double x) {
    switch (act) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    }
    throw ConfigError("unknown activation");
}

// Derivative expressed through the post-activation value.
double activate_grad(Activation act, double post) {
    switch (act) {
    case Activation::Relu: return post > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - post * post;
    }
    throw ConfigError("unknown activation");
}

void check_spec(const NetworkSpec& spec) {
    if (spec.widths.size() < 2) throw ConfigError("network needs at least one layer");
    for (std::size_t w : spec.widths)
        if (w == 0) throw ConfigError("zero-width layer");
}

void affine(const Matrix& w, const Vec& b, const Vec& x, Vec& out) {
    out.resize(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double acc = b[r];
        const double* wr = w.row(r);
        for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

} // namespace

MlpGrads::MlpGrads(const Mlp& net) {
    weights.reserve(net.weights.size());
    biases.reserve(net.biases.size());
    for (const Matrix& w : net.weights) weights.emplace_back(w.rows, w.cols);
    for (const Vec& b : net.biases) biases.emplace_back(b.size(), 0.0);
}

void MlpGrads::zero() {
    for (Matrix& w : weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (Vec& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void MlpGrads::scale(double s) {
    for (Matrix& w : weights)
        for (double& v : w.data) v *= s;
    for (Vec& b : biases)
        for (double& v : b) v *= s;
}

Mlp make_mlp(const NetworkSpec& spec, Rng& rng, bool activate_final) {
    check_spec(spec);
    Mlp net;
    net.spec = spec;
    net.activate_final = activate_final;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const std::size_t fan_in = spec.widths[l];
        const std::size_t fan_out = spec.widths[l + 1];
        const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data) v = (2.0 * rng.uniform01() - 1.0) * limit;
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

Vec mlp_forward(const Mlp& net, const Vec& in) {
    if (in.size() != net.spec.input_dim())
        throw ShapeError("input size does not match network input width");
    Vec cur = in;
    Vec next;
    const std::size_t layers = net.spec.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        affine(net.weights[l], net.biases[l], cur, next);
        const bool act = (l + 1 < layers) || net.activate_final;
        if (act)
            for (double& v : next) v = activate(net.spec.activation, v);
        cur.swap(next);
    }
    return cur;
}

ForwardTrace mlp_forward_trace(const Mlp& net, const Vec& in) {
    if (in.size() != net.spec.input_dim())
        throw ShapeError("input size does not match network input width");
    ForwardTrace trace;
    trace.input = in;
    const std::size_t layers = net.spec.layer_count();
    trace.pre.resize(layers);
    trace.post.resize(layers);
    const Vec* cur = &trace.input;
    for (std::size_t l = 0; l < layers; ++l) {
        affine(net.weights[l], net.biases[l], *cur, trace.pre[l]);
        trace.post[l] = trace.pre[l];
        const bool act = (l + 1 < layers) || net.activate_final;
        if (act)
            for (double& v : trace.post[l]) v = activate(net.spec.activation, v);
        cur = &trace.post[l];
    }
    return trace;
}

Matrix mlp_forward_batch(const Mlp& net, const Matrix& inputs) {
    if (inputs.cols != net.spec.input_dim())
        throw ShapeError("batch column count does not match network input width");
    Matrix out(inputs.rows, net.spec.output_dim());
    kernels::for_each_index(inputs.rows, [&](std::size_t r) {
        const Vec y = mlp_forward(net, inputs.row_vec(r));
        for (std::size_t c = 0; c < out.cols; ++c) out.at(r, c) = y[c];
    });
    return out;
}

Vec mlp_backward(const Mlp& net, const ForwardTrace& trace, const Vec& d_out,
                 MlpGrads* grads) {
    const std::size_t layers = net.spec.layer_count();
    if (trace.post.size() != layers) throw ShapeError("trace does not match network");
    if (d_out.size() != net.spec.output_dim())
        throw ShapeError("gradient size does not match network output width");

    Vec delta = d_out;
    Vec prev_delta;
    for (std::size_t li = layers; li-- > 0;) {
        const bool act = (li + 1 < layers) || net.activate_final;
        if (act)
            for (std::size_t r = 0; r < delta.size(); ++r)
                delta[r] *= activate_grad(net.spec.activation, trace.post[li][r]);

        const Vec& layer_in = (li == 0) ? trace.input : trace.post[li - 1];
        const Matrix& w = net.weights[li];
        if (grads) {
            Matrix& dw = grads->weights[li];
            Vec& db = grads->biases[li];
            for (std::size_t r = 0; r < w.rows; ++r) {
                db[r] += delta[r];
                double* dwr = dw.row(r);
                for (std::size_t c = 0; c < w.cols; ++c)
                    dwr[c] += delta[r] * layer_in[c];
            }
        }
        prev_delta.assign(w.cols, 0.0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            const double* wr = w.row(r);
            for (std::size_t c = 0; c < w.cols; ++c)
                prev_delta[c] += wr[c] * delta[r];
        }
        delta.swap(prev_delta);
    }
    return delta;
}

AdamState::AdamState(const Mlp& net, const AdamConfig& c) : cfg(c) {
    for (const Matrix& w : net.weights) {
        m_weights.emplace_back(w.rows, w.cols);
        v_weights.emplace_back(w.rows, w.cols);
    }
    for (const Vec& b : net.biases) {
        m_biases.emplace_back(b.size(), 0.0);
        v_biases.emplace_back(b.size(), 0.0);
    }
}

namespace {

void adam_update(double g, double& p, double& m, double& v, const AdamConfig& cfg,
                 double bc1, double bc2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    p -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * p);
}

} // namespace

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state) {
    if (net.frozen) throw ConfigError("attempted to update a frozen network");
    state.step += 1;
    const AdamConfig& cfg = state.cfg;
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.step));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        Matrix& w = net.weights[l];
        for (std::size_t i = 0; i < w.data.size(); ++i)
            adam_update(grads.weights[l].data[i], w.data[i], state.m_weights[l].data[i],
                        state.v_weights[l].data[i], cfg, bc1, bc2);
        Vec& b = net.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i)
            adam_update(grads.biases[l][i], b[i], state.m_biases[l][i],
                        state.v_biases[l][i], cfg, bc1, bc2);
    }
}

std::uint64_t params_checksum(const Mlp& net) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &p[i], sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xffu;
                h *= 0x100000001b3ull;
            }
        }
    };
    for (const Matrix& w : net.weights) mix(w.data.data(), w.data.size());
    for (const Vec& b : net.biases) mix(b.data(), b.size());
    return h;
}

} // namespace xma
