#include "esa/model.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "esa/errors.hpp"

namespace esa {

namespace {

std::vector<int> layer_dims(const ScorerSpec& spec) {
    if (spec.input_dim < 1) throw ConfigError("scorer input_dim must be >= 1");
    if (spec.class_count < 2) throw ConfigError("scorer class_count must be >= 2");
    std::vector<int> dims;
    dims.push_back(spec.input_dim);
    for (int h : spec.hidden) {
        if (h < 1) throw ConfigError("scorer hidden width must be >= 1");
        dims.push_back(h);
    }
    dims.push_back(spec.class_count);
    return dims;
}

void check_feature_dim(const ScorerParams& params, Eigen::Index cols) {
    if (cols != params.spec.input_dim) {
        throw ShapeError("feature dimension " + std::to_string(cols) +
                         " does not match scorer input_dim " +
                         std::to_string(params.spec.input_dim));
    }
}

// Uniform double in [0,1) from raw engine bits; stable across platforms.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::int64_t ScorerParams::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

ParamGrads zero_grads(const ScorerParams& params) {
    ParamGrads g;
    for (const auto& w : params.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : params.biases) g.biases.push_back(Vector::Zero(b.size()));
    return g;
}

void grads_add(ParamGrads& acc, const ParamGrads& g, double scale) {
    if (acc.weights.size() != g.weights.size()) throw ShapeError("gradient layer count mismatch");
    for (std::size_t l = 0; l < acc.weights.size(); ++l) {
        acc.weights[l] += scale * g.weights[l];
        acc.biases[l] += scale * g.biases[l];
    }
}

ScorerParams init_params(const ScorerSpec& spec, std::uint64_t seed) {
    const auto dims = layer_dims(spec);
    std::mt19937_64 rng(seed);
    ScorerParams params;
    params.spec = spec;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        const double bound = std::sqrt(6.0 / (in + out));
        Matrix w(out, in);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                w(r, c) = (2.0 * unit_uniform(rng) - 1.0) * bound;
            }
        }
        params.weights.push_back(std::move(w));
        params.biases.push_back(Vector::Zero(out));
    }
    return params;
}

Vector forward(const ScorerParams& params, const Vector& x) {
    check_feature_dim(params, x.size());
    Vector a = x;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        Vector z = params.weights[l] * a + params.biases[l];
        if (l + 1 < params.weights.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

Matrix forward_batch(const ScorerParams& params, const Matrix& X) {
    check_feature_dim(params, X.cols());
    Matrix a = X;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        Matrix z = a * params.weights[l].transpose();
        z.rowwise() += params.biases[l].transpose();
        if (l + 1 < params.weights.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

ForwardTrace forward_trace(const ScorerParams& params, const Matrix& X) {
    check_feature_dim(params, X.cols());
    ForwardTrace trace;
    trace.layer_inputs.reserve(params.weights.size());
    Matrix a = X;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        trace.layer_inputs.push_back(a);
        Matrix z = a * params.weights[l].transpose();
        z.rowwise() += params.biases[l].transpose();
        if (l + 1 < params.weights.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    trace.scores = std::move(a);
    return trace;
}

ParamGrads backward(const ScorerParams& params, const ForwardTrace& trace,
                    const Matrix& dscores) {
    const std::size_t layers = params.weights.size();
    if (trace.layer_inputs.size() != layers) throw ShapeError("forward trace layer mismatch");
    if (dscores.rows() != trace.scores.rows() || dscores.cols() != trace.scores.cols()) {
        throw ShapeError("upstream gradient shape does not match scores");
    }
    ParamGrads grads = zero_grads(params);
    Matrix delta = dscores;
    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l] = delta.transpose() * trace.layer_inputs[l];
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = delta * params.weights[l];
            // layer_inputs[l] is the post-ReLU output of layer l-1; positive
            // entries mark where the ReLU passed gradient through.
            delta.array() *= (trace.layer_inputs[l].array() > 0.0).cast<double>();
        }
    }
    return grads;
}

ParamGrads backward(const ScorerParams& params, const Matrix& X, const Matrix& dscores) {
    return backward(params, forward_trace(params, X), dscores);
}

OptimizerState make_optimizer_state(const ScorerParams& params) {
    OptimizerState s;
    for (const auto& w : params.weights) {
        s.w_slot1.push_back(Matrix::Zero(w.rows(), w.cols()));
        s.w_slot2.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : params.biases) {
        s.b_slot1.push_back(Vector::Zero(b.size()));
        s.b_slot2.push_back(Vector::Zero(b.size()));
    }
    return s;
}

namespace {

template <typename Arr>
void sgd_update(Arr& p, Arr& vel, const Arr& g, const OptimizerConfig& cfg) {
    vel = cfg.momentum * vel - cfg.lr * g;
    p += vel;
}

template <typename Arr>
void adadelta_update(Arr& p, Arr& eg2, Arr& edx2, const Arr& g, const OptimizerConfig& cfg) {
    eg2 = cfg.rho * eg2 + (1.0 - cfg.rho) * g.cwiseProduct(g);
    Arr dx = -((edx2.array() + cfg.eps).sqrt() / (eg2.array() + cfg.eps).sqrt()).matrix()
                  .cwiseProduct(g);
    edx2 = cfg.rho * edx2 + (1.0 - cfg.rho) * dx.cwiseProduct(dx);
    p += cfg.lr * dx;
}

}  // namespace

void optimizer_step(ScorerParams& params, OptimizerState& state,
                    const ParamGrads& grads, const OptimizerConfig& config) {
    const std::size_t layers = params.weights.size();
    if (grads.weights.size() != layers || state.w_slot1.size() != layers) {
        throw ShapeError("optimizer state or gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < layers; ++l) {
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            throw DivergenceError("non-finite gradient in layer " + std::to_string(l));
        }
    }
    for (std::size_t l = 0; l < layers; ++l) {
        switch (config.kind) {
            case OptKind::Sgd:
                sgd_update(params.weights[l], state.w_slot1[l], grads.weights[l], config);
                sgd_update(params.biases[l], state.b_slot1[l], grads.biases[l], config);
                break;
            case OptKind::Adadelta:
                adadelta_update(params.weights[l], state.w_slot1[l], state.w_slot2[l],
                                grads.weights[l], config);
                adadelta_update(params.biases[l], state.b_slot1[l], state.b_slot2[l],
                                grads.biases[l], config);
                break;
        }
    }
}

namespace {

void write_values(std::ostream& out, const double* data, std::int64_t n) {
    char buf[48];
    for (std::int64_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%a", data[i]);
        out << buf << (i + 1 == n ? '\n' : ' ');
    }
}

double read_value(std::istream& in, const std::string& path) {
    std::string tok;
    if (!(in >> tok)) throw FormatError("checkpoint truncated: " + path);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw FormatError("checkpoint has malformed value '" + tok + "': " + path);
    }
    return v;
}

}  // namespace

void save_checkpoint(const ScorerParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out << "esa-scorer v1\n";
    out << "input_dim " << params.spec.input_dim << '\n';
    out << "hidden";
    for (int h : params.spec.hidden) out << ' ' << h;
    out << '\n';
    out << "class_count " << params.spec.class_count << '\n';
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const auto& w = params.weights[l];
        out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
        write_values(out, w.data(), w.size());
        write_values(out, params.biases[l].data(), params.biases[l].size());
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

ScorerParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "esa-scorer v1") {
        throw FormatError("not an esa-scorer v1 checkpoint: " + path);
    }
    ScorerSpec spec;
    std::string key;
    if (!(in >> key >> spec.input_dim) || key != "input_dim") {
        throw FormatError("checkpoint missing input_dim: " + path);
    }
    if (!(in >> key) || key != "hidden") throw FormatError("checkpoint missing hidden: " + path);
    std::getline(in, line);
    std::istringstream hs(line);
    for (int h; hs >> h;) spec.hidden.push_back(h);
    if (!(in >> key >> spec.class_count) || key != "class_count") {
        throw FormatError("checkpoint missing class_count: " + path);
    }
    ScorerParams params;
    params.spec = spec;
    const auto dims = layer_dims(spec);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        std::size_t idx;
        Eigen::Index rows, cols;
        if (!(in >> key >> idx >> rows >> cols) || key != "layer" || idx != l) {
            throw FormatError("checkpoint missing layer " + std::to_string(l) + ": " + path);
        }
        if (rows != dims[l + 1] || cols != dims[l]) {
            throw FormatError("checkpoint layer " + std::to_string(l) + " has shape " +
                              std::to_string(rows) + "x" + std::to_string(cols) +
                              ", expected " + std::to_string(dims[l + 1]) + "x" +
                              std::to_string(dims[l]) + ": " + path);
        }
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = read_value(in, path);
        Vector b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) b[i] = read_value(in, path);
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    return params;
}

}  // namespace esa
