#pragma once

#include <cstdint>
#include <string>

#include "esa/risk.hpp"

namespace esa {

// Exact risk of the unsieved MPU objective under a discrete domain:
// sum_i pi_i E_{p_i}[ovr(f,i) - ovr(f,C)] + E_{p_u}[ovr(f,C)].
double exact_mpu_risk(const DiscreteDomain& domain, const ScorerParams& params, LossKind kind);

// Exact fully supervised one-versus-rest risk sum_y pi_y E_{p_y}[ovr(f,y)];
// equals exact_mpu_risk for every scorer.
double exact_supervised_ovr_risk(const DiscreteDomain& domain, const ScorerParams& params,
                                 LossKind kind);

struct Eq1Report {
    double direct;         // zero-one risk enumerated over the joint
    double decomposition;  // labeled difference terms + unlabeled term
    double residual;
};

// Zero-one analogue of the MPU rewrite.
Eq1Report check_eq1_decomposition(const DiscreteDomain& domain, const ScorerParams& params);

struct BiasReport {
    double mean_bias = 0.0;  // mean over trials of (sieved estimate - exact risk)
    double std_error = 0.0;
    double exact_risk = 0.0;
    int trials = 0;
    int n_m = 0;
    int n_u = 0;
    // True when a sieve branch has probability zero under the domain, so
    // Lemma-2-style positivity has no force (e.g. thresholds at -inf).
    bool degenerate_threshold = false;
};

// Samples n_m labeled examples (classes drawn by the positive priors, all
// classes forced present) and n_u unlabeled examples per trial, evaluates
// the sieved estimator at fixed params, and reports the bias against the
// exact unsieved risk.
BiasReport monte_carlo_bias(const DiscreteDomain& domain, const ScorerParams& params,
                            LossKind kind, const SieveThresholds& thresholds, int n_m,
                            int n_u, int trials, std::uint64_t seed);

// Deviation-probability bound exp(-2 (a_m^2 n_m^s C_m^2 + a_u^2 n_u^s C_u^2)
// / (C_m^2 C_u^2)).
double lemma3_bound(double alpha_m, double alpha_u, double c_m, double c_u, int n_m_s,
                    int n_u_s);

struct GradientCheckReport {
    double max_rel_error = 0.0;
    std::string worst_coordinate;
    double tolerance = 0.0;
    bool pass = false;
};

// Central-difference check of risk_gradient against risk_value over every
// parameter coordinate; relative error is measured where |analytic| > 1e-8.
GradientCheckReport gradient_check(Method method, const ScorerParams& params,
                                   const MpuDataset& data, LossKind kind,
                                   const ClassPriors& priors, const SievedIndices* sieved,
                                   double tolerance);

}  // namespace esa
