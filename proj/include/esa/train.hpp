#pragma once

#include <cstdint>
#include <vector>

#include "esa/risk.hpp"

namespace esa {

struct TrainConfig {
    Method method = Method::Esa;
    LossKind loss = LossKind::MarginSquare;
    std::vector<int> hidden;  // scorer architecture; empty = linear
    int epochs = 50;
    int batch_size = 256;
    OptimizerConfig optimizer;
    SieveThresholds thresholds;  // ESA forms only
    int sieve_start_epoch = 1;   // first 0-based epoch that sieves
    std::uint64_t seed = 1;
};

struct Evaluation {
    double accuracy = 0.0;
    double negative_accuracy = 0.0;  // recall of the negative class
    std::vector<double> per_class;   // NaN for classes absent from the test set
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_risk = 0.0;
    double test_accuracy = 0.0;
    double negative_accuracy = 0.0;
    std::vector<int> kept_labeled;  // n_i^s (full counts when no sieve applies)
    int kept_unlabeled = 0;         // n_u^s
    // Smallest clamped nnPU correction used by any step this epoch; NaN for
    // other methods.
    double min_nnpu_correction = 0.0;
};

struct TrainResult {
    ScorerParams params;
    std::vector<EpochRecord> epochs;
};

// Accuracy of params on a labeled test set. A 2-output scorer evaluated
// against a C-class test set maps predicted class 2 to C.
Evaluation evaluate(const ScorerParams& params, const LabeledDataset& test);

// Stratified mini-batch training driven by config.method's risk gradient.
// Per epoch: ESA forms re-sieve with the current scorer once epoch >=
// sieve_start_epoch; the unlabeled stream is shuffled and split into
// ceil(n_u^s / batch_size) chunks; every labeled stream contributes
// min(batch_size, n_i^s) examples per step. Deterministic for a given seed.
TrainResult train(const TrainConfig& config, const MpuDataset& data,
                  const LabeledDataset& test);

}  // namespace esa
