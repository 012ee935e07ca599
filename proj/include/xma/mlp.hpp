#pragma once

#include <cstdint>
#include <vector>

#include "xma/embedding.hpp"
#include "xma/rng.hpp"

namespace xma {

enum class Activation : std::uint8_t { Relu = 0, Tanh = 1 };
enum class InputKind : std::uint8_t { FlatVector = 0, TemporalSequence = 1 };

struct NetworkSpec {
    std::vector<std::size_t> widths; // [input, hidden..., output]
    Activation activation = Activation::Relu;
    InputKind input_kind = InputKind::FlatVector;

    std::size_t input_dim() const { return widths.front(); }
    std::size_t output_dim() const { return widths.back(); }
    std::size_t layer_count() const { return widths.size() - 1; }
};

// Fully connected network. Hidden layers are activated; the final layer is
// linear unless activate_final is set (the audio trunk rectifies its output
// so the pooled activations stay nonnegative).
struct Mlp {
    NetworkSpec spec;
    std::vector<Matrix> weights; // layer l: widths[l+1] x widths[l]
    std::vector<Vec> biases;
    bool activate_final = false;
    bool frozen = false;
};

struct ForwardTrace {
    Vec input;
    std::vector<Vec> pre;  // pre-activation per layer
    std::vector<Vec> post; // post-activation per layer; post.back() is the output
};

struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<Vec> biases;

    explicit MlpGrads(const Mlp& net);
    void zero();
    void scale(double s);
};

// Glorot-uniform initialization drawn from rng in a fixed order.
Mlp make_mlp(const NetworkSpec& spec, Rng& rng, bool activate_final = false);

// Throws ShapeError unless in.size() == spec.input_dim().
Vec mlp_forward(const Mlp& net, const Vec& in);
ForwardTrace mlp_forward_trace(const Mlp& net, const Vec& in);

// Row-parallel batch forward; data-parallel over rows, bit-identical to
// looping mlp_forward.
Matrix mlp_forward_batch(const Mlp& net, const Matrix& inputs);

// Backpropagates d_out (dL/d output) through the traced forward pass.
// Returns dL/d input; when grads is non-null the parameter gradients are
// accumulated into it.
Vec mlp_backward(const Mlp& net, const ForwardTrace& trace, const Vec& d_out,
                 MlpGrads* grads);

struct AdamConfig {
    double lr = 1e-3;
    double weight_decay = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Moment accumulators shaped like the parameters, plus the step counter.
struct AdamState {
    AdamConfig cfg;
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Vec> m_biases, v_biases;
    std::uint64_t step = 0;

    AdamState(const Mlp& net, const AdamConfig& cfg);
};

// One decoupled-weight-decay Adam update. Throws if net.frozen.
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state);

// FNV-1a over the parameter bytes; used to assert frozen nets never move.
std::uint64_t params_checksum(const Mlp& net);

} // namespace xma
