#include "esa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "esa/errors.hpp"

namespace esa {

namespace {

Matrix domain_scores(const DiscreteDomain& domain, const ScorerParams& params) {
    if (params.class_count() != domain.class_count()) {
        throw ConfigError("scorer outputs " + std::to_string(params.class_count()) +
                          " classes, domain has " + std::to_string(domain.class_count()));
    }
    return forward_batch(params, domain.points);
}

double ovr_row(LossKind kind, const Matrix& scores, Eigen::Index r, int y) {
    double total = phi(kind, scores(r, y - 1));
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
        if (k != y - 1) total += phi(kind, -scores(r, k));
    }
    return total;
}

}  // namespace

double exact_mpu_risk(const DiscreteDomain& domain, const ScorerParams& params,
                      LossKind kind) {
    domain.validate();
    const Matrix scores = domain_scores(domain, params);
    const int c = domain.class_count();
    const Vector pi = domain.class_marginals();
    double risk = 0.0;
    for (int i = 1; i < c; ++i) {
        const Vector cond = domain.joint_pmf.col(i - 1) / pi[i - 1];
        double expect = 0.0;
        for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
            expect += cond[p] * (ovr_row(kind, scores, p, i) - ovr_row(kind, scores, p, c));
        }
        risk += pi[i - 1] * expect;
    }
    const Vector pu = domain.joint_pmf.rowwise().sum();
    for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
        risk += pu[p] * ovr_row(kind, scores, p, c);
    }
    return risk;
}

double exact_supervised_ovr_risk(const DiscreteDomain& domain, const ScorerParams& params,
                                 LossKind kind) {
    domain.validate();
    const Matrix scores = domain_scores(domain, params);
    double risk = 0.0;
    for (int y = 1; y <= domain.class_count(); ++y) {
        for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
            risk += domain.joint_pmf(p, y - 1) * ovr_row(kind, scores, p, y);
        }
    }
    return risk;
}

Eq1Report check_eq1_decomposition(const DiscreteDomain& domain, const ScorerParams& params) {
    domain.validate();
    const Matrix scores = domain_scores(domain, params);
    const int c = domain.class_count();
    std::vector<int> pred(static_cast<std::size_t>(domain.point_count()));
    for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < scores.cols(); ++k) {
            if (scores(p, k) > scores(p, best)) best = k;
        }
        pred[static_cast<std::size_t>(p)] = static_cast<int>(best) + 1;
    }

    double direct = 0.0;
    for (int y = 1; y <= c; ++y) {
        for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
            if (pred[static_cast<std::size_t>(p)] != y) direct += domain.joint_pmf(p, y - 1);
        }
    }

    const Vector pi = domain.class_marginals();
    double decomposition = 0.0;
    for (int i = 1; i < c; ++i) {
        for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
            const double miss_i = pred[static_cast<std::size_t>(p)] != i ? 1.0 : 0.0;
            const double miss_c = pred[static_cast<std::size_t>(p)] != c ? 1.0 : 0.0;
            decomposition += domain.joint_pmf(p, i - 1) * (miss_i - miss_c);
        }
    }
    const Vector pu = domain.joint_pmf.rowwise().sum();
    for (Eigen::Index p = 0; p < domain.point_count(); ++p) {
        if (pred[static_cast<std::size_t>(p)] != c) decomposition += pu[p];
    }
    return {direct, decomposition, std::abs(direct - decomposition)};
}

BiasReport monte_carlo_bias(const DiscreteDomain& domain, const ScorerParams& params,
                            LossKind kind, const SieveThresholds& thresholds, int n_m,
                            int n_u, int trials, std::uint64_t seed) {
    domain.validate();
    const int c = domain.class_count();
    if (n_m < c - 1) {
        throw InvalidInputError("n_m = " + std::to_string(n_m) + " cannot cover " +
                                std::to_string(c - 1) + " positive classes");
    }
    if (n_u < 1) throw InvalidInputError("n_u must be >= 1");
    if (trials < 2) throw InvalidInputError("need at least 2 trials for a standard error");
    if (std::isnan(thresholds.sigma_m) || std::isnan(thresholds.sigma_u)) {
        throw InvalidInputError("sieve thresholds must not be NaN");
    }

    const Matrix scores = domain_scores(domain, params);
    const Eigen::Index points = domain.point_count();

    // Certain-loss tables, computed once; trials only index into them.
    Matrix clm(points, c - 1);
    Vector clu(points);
    for (Eigen::Index p = 0; p < points; ++p) {
        const double lc = ovr_row(kind, scores, p, c);
        for (int i = 1; i < c; ++i) clm(p, i - 1) = ovr_row(kind, scores, p, i) - lc;
        clu[p] = lc;
    }

    const Vector pi = domain.class_marginals();
    const Vector pu = domain.joint_pmf.rowwise().sum();
    const double exact = exact_mpu_risk(domain, params, kind);

    // Degeneracy: for Lemma-2-style positivity both the all-survive event and
    // the some-example-sieved event need positive probability.
    bool can_drop = false;
    bool all_streams_can_survive = true;
    for (int i = 0; i < c - 1; ++i) {
        double keep_mass = 0.0, total_mass = 0.0;
        for (Eigen::Index p = 0; p < points; ++p) {
            const double m = domain.joint_pmf(p, i);
            total_mass += m;
            if (clm(p, i) >= thresholds.sigma_m) keep_mass += m;
        }
        if (keep_mass < total_mass) can_drop = true;
        if (keep_mass == 0.0) all_streams_can_survive = false;
    }
    {
        double keep_mass = 0.0;
        for (Eigen::Index p = 0; p < points; ++p) {
            if (clu[p] >= thresholds.sigma_u) keep_mass += pu[p];
        }
        if (keep_mass < pu.sum()) can_drop = true;
        if (keep_mass == 0.0) all_streams_can_survive = false;
    }

    std::vector<double> label_weights(static_cast<std::size_t>(c) - 1);
    for (int i = 0; i < c - 1; ++i) label_weights[static_cast<std::size_t>(i)] = pi[i];
    std::vector<std::discrete_distribution<int>> cond_draw;
    for (int i = 0; i < c - 1; ++i) {
        std::vector<double> w(static_cast<std::size_t>(points));
        for (Eigen::Index p = 0; p < points; ++p) w[std::size_t(p)] = domain.joint_pmf(p, i);
        cond_draw.emplace_back(w.begin(), w.end());
    }
    std::vector<double> pu_w(static_cast<std::size_t>(points));
    for (Eigen::Index p = 0; p < points; ++p) pu_w[std::size_t(p)] = pu[p];

    double mean = 0.0, m2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t(t) + 1));
        std::discrete_distribution<int> label_draw(label_weights.begin(), label_weights.end());
        std::discrete_distribution<int> pu_draw(pu_w.begin(), pu_w.end());

        // Class assignment for the labeled sample; redrawn whole until every
        // positive class appears so each per-class mean is defined.
        std::vector<int> counts;
        for (int attempt = 0;; ++attempt) {
            counts.assign(static_cast<std::size_t>(c) - 1, 0);
            for (int j = 0; j < n_m; ++j) ++counts[static_cast<std::size_t>(label_draw(rng))];
            if (std::all_of(counts.begin(), counts.end(), [](int k) { return k > 0; })) break;
            if (attempt > 100000) {
                throw InvalidInputError("could not draw a labeled sample covering all classes");
            }
        }

        double estimate = 0.0;
        for (int i = 0; i < c - 1; ++i) {
            double kept_sum = 0.0;
            int kept_n = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < counts[static_cast<std::size_t>(i)]; ++j) {
                const double cl = clm(cond_draw[static_cast<std::size_t>(i)](rng), i);
                if (cl >= thresholds.sigma_m) {
                    kept_sum += cl;
                    ++kept_n;
                }
                best = std::max(best, cl);
            }
            const double mean_kept = kept_n > 0 ? kept_sum / kept_n : best;
            estimate += pi[i] * mean_kept;
        }
        {
            double kept_sum = 0.0;
            int kept_n = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < n_u; ++j) {
                const double cl = clu[pu_draw(rng)];
                if (cl >= thresholds.sigma_u) {
                    kept_sum += cl;
                    ++kept_n;
                }
                best = std::max(best, cl);
            }
            estimate += kept_n > 0 ? kept_sum / kept_n : best;
        }

        const double bias = estimate - exact;
        const double delta = bias - mean;
        mean += delta / (t + 1);
        m2 += delta * (bias - mean);
    }

    BiasReport report;
    report.mean_bias = mean;
    report.std_error = std::sqrt(m2 / (trials - 1)) / std::sqrt(double(trials));
    report.exact_risk = exact;
    report.trials = trials;
    report.n_m = n_m;
    report.n_u = n_u;
    report.degenerate_threshold = !(can_drop && all_streams_can_survive);
    return report;
}

double lemma3_bound(double alpha_m, double alpha_u, double c_m, double c_u, int n_m_s,
                    int n_u_s) {
    if (!std::isfinite(alpha_m) || !std::isfinite(alpha_u) || alpha_m < 0.0 || alpha_u < 0.0) {
        throw InvalidInputError("alpha margins must be finite and >= 0");
    }
    if (!std::isfinite(c_m) || !std::isfinite(c_u) || c_m <= 0.0 || c_u <= 0.0) {
        throw InvalidInputError("certain-loss bounds must be finite and > 0");
    }
    if (n_m_s < 1 || n_u_s < 1) throw InvalidInputError("sieved counts must be >= 1");
    const double num = alpha_m * alpha_m * n_m_s * c_m * c_m +
                       alpha_u * alpha_u * n_u_s * c_u * c_u;
    return std::exp(-2.0 * num / (c_m * c_m * c_u * c_u));
}

GradientCheckReport gradient_check(Method method, const ScorerParams& params,
                                   const MpuDataset& data, LossKind kind,
                                   const ClassPriors& priors, const SievedIndices* sieved,
                                   double tolerance) {
    const ParamGrads analytic = risk_gradient(method, params, data, kind, priors, sieved);
    ScorerParams probe = params;

    GradientCheckReport report;
    report.tolerance = tolerance;

    auto check_coord = [&](double& slot, double a, const std::string& name) {
        const double saved = slot;
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        slot = saved + h;
        const double up = risk_value(method, probe, data, kind, priors, sieved);
        slot = saved - h;
        const double down = risk_value(method, probe, data, kind, priors, sieved);
        slot = saved;
        const double fd = (up - down) / (2.0 * h);
        if (std::abs(a) <= 1e-8 && std::abs(fd) <= 1e-8) return;
        const double rel = std::abs(a - fd) / std::max(std::abs(a), std::abs(fd));
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_coordinate = name;
        }
    };

    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
        Matrix& w = probe.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index col = 0; col < w.cols(); ++col) {
                check_coord(w(r, col), analytic.weights[l](r, col),
                            "layer " + std::to_string(l) + " weight (" + std::to_string(r) +
                                "," + std::to_string(col) + ")");
            }
        }
        Vector& b = probe.biases[l];
        for (Eigen::Index r = 0; r < b.size(); ++r) {
            check_coord(b[r], analytic.biases[l][r],
                        "layer " + std::to_string(l) + " bias " + std::to_string(r));
        }
    }
    report.pass = report.max_rel_error <= tolerance;
    return report;
}

}  // namespace esa
