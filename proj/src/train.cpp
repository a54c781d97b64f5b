#include "esa/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "esa/errors.hpp"

namespace esa {

Evaluation evaluate(const ScorerParams& params, const LabeledDataset& test) {
    if (test.size() < 1) throw InvalidInputError("test set is empty");
    if (params.spec.input_dim != test.dim()) {
        throw ShapeError("scorer input_dim " + std::to_string(params.spec.input_dim) +
                         " does not match test dim " + std::to_string(test.dim()));
    }
    const int c_test = test.class_count;
    const int c_model = params.class_count();
    const bool binary_on_multiclass = (c_model == 2 && c_test > 2);
    if (!binary_on_multiclass && c_model != c_test) {
        throw ConfigError("scorer outputs " + std::to_string(c_model) +
                          " classes, test set has " + std::to_string(c_test));
    }

    const Matrix scores = forward_batch(params, test.features);
    std::vector<int> correct(static_cast<std::size_t>(c_test), 0);
    std::vector<int> total(static_cast<std::size_t>(c_test), 0);
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < scores.cols(); ++k) {
            if (scores(r, k) > scores(r, best)) best = k;
        }
        int pred = static_cast<int>(best) + 1;
        if (binary_on_multiclass && pred == 2) pred = c_test;
        const int y = test.labels[static_cast<std::size_t>(r)];
        ++total[static_cast<std::size_t>(y) - 1];
        if (pred == y) ++correct[static_cast<std::size_t>(y) - 1];
    }

    Evaluation eval;
    eval.per_class.resize(static_cast<std::size_t>(c_test));
    int hits = 0;
    for (int y = 0; y < c_test; ++y) {
        hits += correct[static_cast<std::size_t>(y)];
        eval.per_class[static_cast<std::size_t>(y)] =
            total[static_cast<std::size_t>(y)] > 0
                ? double(correct[std::size_t(y)]) / double(total[std::size_t(y)])
                : std::numeric_limits<double>::quiet_NaN();
    }
    eval.accuracy = static_cast<double>(hits) / static_cast<double>(test.size());
    eval.negative_accuracy = eval.per_class[static_cast<std::size_t>(c_test) - 1];
    return eval;
}

namespace {

// Hands out shuffled indices, reshuffling when the pool is exhausted.
class Cycler {
  public:
    void reset(const std::vector<int>& pool, std::mt19937_64& rng) {
        pool_ = pool;
        std::shuffle(pool_.begin(), pool_.end(), rng);
        pos_ = 0;
    }

    std::vector<int> take(std::size_t k, std::mt19937_64& rng) {
        std::vector<int> out;
        out.reserve(k);
        while (out.size() < k) {
            if (pos_ == pool_.size()) {
                std::shuffle(pool_.begin(), pool_.end(), rng);
                pos_ = 0;
            }
            out.push_back(pool_[pos_++]);
        }
        return out;
    }

  private:
    std::vector<int> pool_;
    std::size_t pos_ = 0;
};

}  // namespace

TrainResult train(const TrainConfig& config, const MpuDataset& data,
                  const LabeledDataset& test) {
    data.validate();
    if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (config.sieve_start_epoch < 0) throw ConfigError("sieve_start_epoch must be >= 0");
    if (!std::isfinite(config.optimizer.lr) || config.optimizer.lr < 0.0) {
        throw ConfigError("learning rate must be finite and >= 0");
    }

    const bool binary = (config.method == Method::Upu || config.method == Method::Nnpu);
    const bool uses_sieve = (config.method == Method::Esa || config.method == Method::EsaConvex);
    ScorerSpec spec;
    spec.input_dim = static_cast<int>(data.dim());
    spec.hidden = config.hidden;
    spec.class_count = binary ? 2 : data.class_count();

    TrainResult result{init_params(spec, config.seed), {}};
    OptimizerState opt_state = make_optimizer_state(result.params);
    std::mt19937_64 rng(config.seed + 0x9E3779B97F4A7C15ULL);

    const std::size_t n_pos = data.labeled.size();
    std::vector<Cycler> labeled_cyclers(n_pos);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const SievedIndices kept =
            (uses_sieve && epoch >= config.sieve_start_epoch)
                ? sieve(result.params, data, config.loss, config.thresholds)
                : all_indices(data);

        for (std::size_t i = 0; i < n_pos; ++i) {
            labeled_cyclers[i].reset(kept.labeled[i], rng);
        }
        std::vector<int> unlabeled_order = kept.unlabeled;
        std::shuffle(unlabeled_order.begin(), unlabeled_order.end(), rng);

        const std::size_t n_u_s = unlabeled_order.size();
        const auto bs = static_cast<std::size_t>(config.batch_size);
        const std::size_t steps = (n_u_s + bs - 1) / bs;
        double min_corr = std::numeric_limits<double>::infinity();

        for (std::size_t step = 0; step < steps; ++step) {
            Batch batch;
            batch.labeled.resize(n_pos);
            for (std::size_t i = 0; i < n_pos; ++i) {
                const std::size_t k = std::min(bs, kept.labeled[i].size());
                batch.labeled[i] = labeled_cyclers[i].take(k, rng);
            }
            const std::size_t lo = step * bs;
            const std::size_t hi = std::min(lo + bs, n_u_s);
            batch.unlabeled.assign(unlabeled_order.begin() + std::ptrdiff_t(lo),
                                   unlabeled_order.begin() + std::ptrdiff_t(hi));

            double raw_corr = 0.0;
            const ParamGrads grads =
                risk_gradient(config.method, result.params, data, config.loss, data.priors,
                              uses_sieve ? &kept : nullptr, &batch,
                              config.method == Method::Nnpu ? &raw_corr : nullptr);
            if (config.method == Method::Nnpu) {
                min_corr = std::min(min_corr, std::max(0.0, raw_corr));
            }
            optimizer_step(result.params, opt_state, grads, config.optimizer);
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_risk = risk_value(config.method, result.params, data, config.loss,
                                    data.priors, uses_sieve ? &kept : nullptr);
        const Evaluation eval = evaluate(result.params, test);
        rec.test_accuracy = eval.accuracy;
        rec.negative_accuracy = eval.negative_accuracy;
        for (const auto& idx : kept.labeled) rec.kept_labeled.push_back(int(idx.size()));
        rec.kept_unlabeled = static_cast<int>(kept.unlabeled.size());
        rec.min_nnpu_correction = (config.method == Method::Nnpu)
                                      ? min_corr
                                      : std::numeric_limits<double>::quiet_NaN();
        result.epochs.push_back(std::move(rec));
    }
    return result;
}

}  // namespace esa
