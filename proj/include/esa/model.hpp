#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esa/loss.hpp"

namespace esa {

// Architecture of a scorer producing one real score per class.
// Empty `hidden` means a linear model; otherwise a ReLU MLP.
struct ScorerSpec {
    int input_dim = 0;
    std::vector<int> hidden;
    int class_count = 0;
};

struct ScorerParams {
    ScorerSpec spec;
    std::vector<Matrix> weights;  // layer l maps in -> out, stored out x in
    std::vector<Vector> biases;

    int class_count() const { return spec.class_count; }
    std::int64_t parameter_count() const;
};

// Gradients (or any tangent) with the same shapes as ScorerParams.
struct ParamGrads {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

ParamGrads zero_grads(const ScorerParams& params);
void grads_add(ParamGrads& acc, const ParamGrads& g, double scale);

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
// Deterministic for a given seed.
ScorerParams init_params(const ScorerSpec& spec, std::uint64_t seed);

// Scores for one example / a batch (rows are examples, returns n x C).
Vector forward(const ScorerParams& params, const Vector& x);
Matrix forward_batch(const ScorerParams& params, const Matrix& X);

// Per-layer activations retained for backprop. layer_inputs[l] is the input
// to layer l (post-ReLU for l > 0); scores is the final linear output.
struct ForwardTrace {
    std::vector<Matrix> layer_inputs;
    Matrix scores;
};

ForwardTrace forward_trace(const ScorerParams& params, const Matrix& X);

// Backprop of upstream score gradients (n x C) to parameter space.
// ReLU uses subgradient 0 at 0.
ParamGrads backward(const ScorerParams& params, const ForwardTrace& trace,
                    const Matrix& dscores);
ParamGrads backward(const ScorerParams& params, const Matrix& X, const Matrix& dscores);

enum class OptKind { Sgd, Adadelta };

struct OptimizerConfig {
    OptKind kind = OptKind::Adadelta;
    double lr = 8e-2;
    double momentum = 0.0;  // SGD
    double rho = 0.95;      // Adadelta accumulator decay
    double eps = 1e-6;      // Adadelta conditioner
};

// Per-parameter accumulators: SGD keeps velocity in slot1; Adadelta keeps
// E[g^2] in slot1 and E[dx^2] in slot2.
struct OptimizerState {
    std::vector<Matrix> w_slot1, w_slot2;
    std::vector<Vector> b_slot1, b_slot2;
};

OptimizerState make_optimizer_state(const ScorerParams& params);

// In-place update. Throws DivergenceError naming the offending layer if the
// gradient is non-finite.
void optimizer_step(ScorerParams& params, OptimizerState& state,
                    const ParamGrads& grads, const OptimizerConfig& config);

// Versioned text checkpoint; doubles are written as hexfloats so a round
// trip is bit-exact.
void save_checkpoint(const ScorerParams& params, const std::string& path);
ScorerParams load_checkpoint(const std::string& path);

}  // namespace esa
