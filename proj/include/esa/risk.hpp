#pragma once

#include <string>
#include <vector>

#include "esa/data.hpp"
#include "esa/model.hpp"

namespace esa {

// Risk estimators. Upu/Nnpu reduce to binary PU with merged positives; Esa
// sieves by certain loss; EsaConvex drops the paired labeled terms that
// cancel under linear-odd losses.
enum class Method { Upu, Nnpu, Mpu, Nmpu, Esa, EsaConvex };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

// Certain-loss thresholds; -inf keeps everything (sieve disabled).
struct SieveThresholds {
    double sigma_m = 0.0;
    double sigma_u = 0.0;
};

inline constexpr double kSieveOff = -std::numeric_limits<double>::infinity();

// Row indices (into the dataset's blocks) that survived the sieve.
struct SievedIndices {
    std::vector<std::vector<int>> labeled;
    std::vector<int> unlabeled;
};

SievedIndices all_indices(const MpuDataset& data);

// Keeps examples whose certain loss is >= the threshold (ties kept). If a
// set would empty, retains the single example with the maximum certain loss
// (smallest index on ties).
SievedIndices sieve(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                    const SieveThresholds& thresholds);

// Sieved MPU risk: sum_i (pi_i / n_i^s) sum_kept [phi(f_i) - phi(f_C) +
// phi(-f_C) - phi(-f_i)] + (1 / n_u^s) sum_kept ovr_loss(., C). May be
// negative for losses without the linear-odd property.
double esa_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                          const SievedIndices& sieved, const ClassPriors& priors);

// Convex form: the labeled bracket collapses to f_C - f_i under linear-odd
// losses. Rejects MarginSquare.
double esa_empirical_risk_convex(const ScorerParams& params, const MpuDataset& data,
                                 LossKind kind, const SievedIndices& sieved,
                                 const ClassPriors& priors);

// Unsieved risk: sum_i (pi_i / n_i) sum [L(f,i) - L(f,C)] + (1/n_u) sum L(f,C).
double mpu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                          const ClassPriors& priors);

// Non-negative variant: every negated labeled term is replaced by its
// reflection, giving the bracket 2 phi(f_i) + 2 phi(-f_C).
double nmpu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                           const ClassPriors& priors);

// Binary PU building blocks on the merged positive set with score
// g = f_1 - f_2 of a 2-output scorer.
struct BinaryPuTerms {
    double pos_risk;      // mean phi(g) over merged positives
    double neg_risk_pos;  // mean phi(-g) over merged positives
    double neg_risk_unl;  // mean phi(-g) over unlabeled
};

BinaryPuTerms binary_pu_terms(const ScorerParams& params, const MpuDataset& data,
                              LossKind kind);

// pi+ * pos_risk + (neg_risk_unl - pi+ * neg_risk_pos), pi+ = sum pi_i.
double upu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                          const ClassPriors& priors);

// Same with the unlabeled-minus-positive correction clamped at zero.
double nnpu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                           const ClassPriors& priors);

// Signed correction term before clamping.
double nnpu_correction(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                       const ClassPriors& priors);

// Mini-batch: row indices per labeled class plus unlabeled rows. Streams
// must be nonempty and drawn from the sieved sets where a sieve applies.
struct Batch {
    std::vector<std::vector<int>> labeled;
    std::vector<int> unlabeled;
};

// Value of any estimator; ESA forms use `sieved` (nullptr = keep all).
double risk_value(Method method, const ScorerParams& params, const MpuDataset& data,
                  LossKind kind, const ClassPriors& priors,
                  const SievedIndices* sieved = nullptr);

// Parameter gradient of any estimator. Batch terms are scaled so the
// expectation over uniform batch draws equals the full-data gradient;
// nullptr batch means the full (sieved) sets. For nnPU the signed correction
// that drove the clamp decision is written to *nnpu_correction_out when
// provided.
ParamGrads risk_gradient(Method method, const ScorerParams& params, const MpuDataset& data,
                         LossKind kind, const ClassPriors& priors,
                         const SievedIndices* sieved = nullptr,
                         const Batch* batch = nullptr,
                         double* nnpu_correction_out = nullptr);

// Argmax class in 1..C, smallest index on ties.
int predict(const ScorerParams& params, const Vector& x);

}  // namespace esa
