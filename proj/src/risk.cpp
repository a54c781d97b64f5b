#include "esa/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "esa/errors.hpp"

namespace esa {

const char* method_name(Method method) {
    switch (method) {
        case Method::Upu: return "upu";
        case Method::Nnpu: return "nnpu";
        case Method::Mpu: return "mpu";
        case Method::Nmpu: return "nmpu";
        case Method::Esa: return "esa";
        case Method::EsaConvex: return "esa-convex";
    }
    throw InvalidInputError("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "upu") return Method::Upu;
    if (name == "nnpu") return Method::Nnpu;
    if (name == "mpu") return Method::Mpu;
    if (name == "nmpu") return Method::Nmpu;
    if (name == "esa") return Method::Esa;
    if (name == "esa-convex") return Method::EsaConvex;
    throw ConfigError("unknown method '" + name +
                      "' (expected upu, nnpu, mpu, nmpu, esa, or esa-convex)");
}

namespace {

void check_multiclass(const ScorerParams& params, const MpuDataset& data,
                      const ClassPriors& priors) {
    data.validate();
    if (priors.class_count() != data.class_count()) {
        throw ConfigError("priors describe " + std::to_string(priors.class_count()) +
                          " classes, dataset has " + std::to_string(data.class_count()));
    }
    if (params.class_count() != data.class_count()) {
        throw ConfigError("scorer outputs " + std::to_string(params.class_count()) +
                          " classes, dataset has " + std::to_string(data.class_count()));
    }
    if (params.spec.input_dim != data.dim()) {
        throw ShapeError("scorer input_dim " + std::to_string(params.spec.input_dim) +
                         " does not match data dim " + std::to_string(data.dim()));
    }
}

void check_binary(const ScorerParams& params, const MpuDataset& data,
                  const ClassPriors& priors) {
    data.validate();
    if (priors.class_count() != data.class_count()) {
        throw ConfigError("priors describe " + std::to_string(priors.class_count()) +
                          " classes, dataset has " + std::to_string(data.class_count()));
    }
    if (params.class_count() != 2) {
        throw ConfigError("binary PU reduction needs a 2-output scorer (score g = f_1 - f_2); "
                          "got " + std::to_string(params.class_count()) + " outputs");
    }
    if (params.spec.input_dim != data.dim()) {
        throw ShapeError("scorer input_dim " + std::to_string(params.spec.input_dim) +
                         " does not match data dim " + std::to_string(data.dim()));
    }
}

Matrix gather_rows(const Matrix& src, const std::vector<int>& rows, const char* what) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= src.rows()) {
            throw InvalidInputError(std::string(what) + ": row index " +
                                    std::to_string(rows[i]) + " outside 0.." +
                                    std::to_string(src.rows() - 1));
        }
        out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
    }
    return out;
}

// ovr_loss of row r of a score matrix, evaluated in place.
double ovr_row(LossKind kind, const Matrix& scores, Eigen::Index r, int y) {
    const Eigen::Index c = scores.cols();
    double total = phi(kind, scores(r, y - 1));
    for (Eigen::Index k = 0; k < c; ++k) {
        if (k != y - 1) total += phi(kind, -scores(r, k));
    }
    return total;
}

// Labeled certain loss via the bracket phi(f_y) - phi(f_C) + phi(-f_C) -
// phi(-f_y); the remaining ovr terms cancel.
double bracket_row(LossKind kind, const Matrix& scores, Eigen::Index r, int y) {
    const Eigen::Index last = scores.cols() - 1;
    return phi(kind, scores(r, y - 1)) - phi(kind, scores(r, last)) +
           phi(kind, -scores(r, last)) - phi(kind, -scores(r, y - 1));
}

void check_sieved_shape(const SievedIndices& sieved, const MpuDataset& data) {
    if (sieved.labeled.size() != data.labeled.size()) {
        throw ConfigError("sieved index set covers " + std::to_string(sieved.labeled.size()) +
                          " classes, dataset has " + std::to_string(data.labeled.size()));
    }
    for (std::size_t i = 0; i < sieved.labeled.size(); ++i) {
        if (sieved.labeled[i].empty()) {
            throw InvalidInputError("sieved labeled class " + std::to_string(i + 1) +
                                    " is empty");
        }
    }
    if (sieved.unlabeled.empty()) throw InvalidInputError("sieved unlabeled set is empty");
}

}  // namespace

SievedIndices all_indices(const MpuDataset& data) {
    SievedIndices all;
    all.labeled.resize(data.labeled.size());
    for (std::size_t i = 0; i < data.labeled.size(); ++i) {
        all.labeled[i].resize(static_cast<std::size_t>(data.labeled[i].rows()));
        std::iota(all.labeled[i].begin(), all.labeled[i].end(), 0);
    }
    all.unlabeled.resize(static_cast<std::size_t>(data.unlabeled.rows()));
    std::iota(all.unlabeled.begin(), all.unlabeled.end(), 0);
    return all;
}

SievedIndices sieve(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                    const SieveThresholds& thresholds) {
    if (std::isnan(thresholds.sigma_m) || std::isnan(thresholds.sigma_u)) {
        throw InvalidInputError("sieve thresholds must not be NaN");
    }
    ClassPriors dummy = data.priors;
    check_multiclass(params, data, dummy);

    SievedIndices kept;
    kept.labeled.resize(data.labeled.size());
    for (std::size_t i = 0; i < data.labeled.size(); ++i) {
        const Matrix scores = forward_batch(params, data.labeled[i]);
        auto& rows = kept.labeled[i];
        double best = -std::numeric_limits<double>::infinity();
        int best_row = 0;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            const double cl = bracket_row(kind, scores, r, static_cast<int>(i) + 1);
            if (cl >= thresholds.sigma_m) rows.push_back(static_cast<int>(r));
            if (cl > best) {
                best = cl;
                best_row = static_cast<int>(r);
            }
        }
        if (rows.empty()) rows.push_back(best_row);
    }

    const Matrix scores = forward_batch(params, data.unlabeled);
    double best = -std::numeric_limits<double>::infinity();
    int best_row = 0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double cl = ovr_row(kind, scores, r, data.class_count());
        if (cl >= thresholds.sigma_u) kept.unlabeled.push_back(static_cast<int>(r));
        if (cl > best) {
            best = cl;
            best_row = static_cast<int>(r);
        }
    }
    if (kept.unlabeled.empty()) kept.unlabeled.push_back(best_row);
    return kept;
}

double esa_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                          const SievedIndices& sieved, const ClassPriors& priors) {
    check_multiclass(params, data, priors);
    check_sieved_shape(sieved, data);
    double risk = 0.0;
    for (std::size_t i = 0; i < data.labeled.size(); ++i) {
        const Matrix x = gather_rows(data.labeled[i], sieved.labeled[i], "sieved labeled");
        const Matrix scores = forward_batch(params, x);
        double sum = 0.0;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            sum += bracket_row(kind, scores, r, static_cast<int>(i) + 1);
        }
        risk += priors[static_cast<int>(i)] * sum / static_cast<double>(scores.rows());
    }
    const Matrix xu = gather_rows(data.unlabeled, sieved.unlabeled, "sieved unlabeled");
    const Matrix scores = forward_batch(params, xu);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        sum += ovr_row(kind, scores, r, data.class_count());
    }
    return risk + sum / static_cast<double>(scores.rows());
}

double esa_empirical_risk_convex(const ScorerParams& params, const MpuDataset& data,
                                 LossKind kind, const SievedIndices& sieved,
                                 const ClassPriors& priors) {
    if (!is_linear_odd(kind)) {
        throw ConfigError(std::string("the convex form needs a linear-odd loss; ") +
                          loss_name(kind) + " is not");
    }
    check_multiclass(params, data, priors);
    check_sieved_shape(sieved, data);
    const Eigen::Index last = data.class_count() - 1;
    double risk = 0.0;
    for (std::size_t i = 0; i < data.labeled.size(); ++i) {
        const Matrix x = gather_rows(data.labeled[i], sieved.labeled[i], "sieved labeled");
        const Matrix scores = forward_batch(params, x);
        double sum = 0.0;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            sum += scores(r, last) - scores(r, static_cast<Eigen::Index>(i));
        }
        risk += priors[static_cast<int>(i)] * sum / static_cast<double>(scores.rows());
    }
    const Matrix xu = gather_rows(data.unlabeled, sieved.unlabeled, "sieved unlabeled");
    const Matrix scores = forward_batch(params, xu);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        sum += ovr_row(kind, scores, r, data.class_count());
    }
    return risk + sum / static_cast<double>(scores.rows());
}

double mpu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                          const ClassPriors& priors) {
    check_multiclass(params, data, priors);
    const int c = data.class_count();
    double risk = 0.0;
    for (std::size_t i = 0; i < data.labeled.size(); ++i) {
        const Matrix scores = forward_batch(params, data.labeled[i]);
        double sum = 0.0;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            sum += ovr_row(kind, scores, r, static_cast<int>(i) + 1) - ovr_row(kind, scores, r, c);
        }
        risk += priors[static_cast<int>(i)] * sum / static_cast<double>(scores.rows());
    }
    const Matrix scores = forward_batch(params, data.unlabeled);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) sum += ovr_row(kind, scores, r, c);
    return risk + sum / static_cast<double>(scores.rows());
}

double nmpu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                           const ClassPriors& priors) {
    check_multiclass(params, data, priors);
    const Eigen::Index last = data.class_count() - 1;
    double risk = 0.0;
    for (std::size_t i = 0; i < data.labeled.size(); ++i) {
        const Matrix scores = forward_batch(params, data.labeled[i]);
        double sum = 0.0;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            sum += 2.0 * phi(kind, scores(r, static_cast<Eigen::Index>(i))) +
                   2.0 * phi(kind, -scores(r, last));
        }
        risk += priors[static_cast<int>(i)] * sum / static_cast<double>(scores.rows());
    }
    const Matrix scores = forward_batch(params, data.unlabeled);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        sum += ovr_row(kind, scores, r, data.class_count());
    }
    return risk + sum / static_cast<double>(scores.rows());
}

BinaryPuTerms binary_pu_terms(const ScorerParams& params, const MpuDataset& data,
                              LossKind kind) {
    ClassPriors dummy = data.priors;
    check_binary(params, data, dummy);
    double pos = 0.0, neg_pos = 0.0;
    Eigen::Index n_m = 0;
    for (const auto& block : data.labeled) {
        const Matrix scores = forward_batch(params, block);
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            const double g = scores(r, 0) - scores(r, 1);
            pos += phi(kind, g);
            neg_pos += phi(kind, -g);
        }
        n_m += scores.rows();
    }
    const Matrix scores = forward_batch(params, data.unlabeled);
    double neg_unl = 0.0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double g = scores(r, 0) - scores(r, 1);
        neg_unl += phi(kind, -g);
    }
    return {pos / static_cast<double>(n_m), neg_pos / static_cast<double>(n_m),
            neg_unl / static_cast<double>(scores.rows())};
}

double upu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                          const ClassPriors& priors) {
    check_binary(params, data, priors);
    const BinaryPuTerms t = binary_pu_terms(params, data, kind);
    const double pi_pos = priors.positive_total();
    return pi_pos * t.pos_risk + t.neg_risk_unl - pi_pos * t.neg_risk_pos;
}

double nnpu_correction(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                       const ClassPriors& priors) {
    check_binary(params, data, priors);
    const BinaryPuTerms t = binary_pu_terms(params, data, kind);
    return t.neg_risk_unl - priors.positive_total() * t.neg_risk_pos;
}

double nnpu_empirical_risk(const ScorerParams& params, const MpuDataset& data, LossKind kind,
                           const ClassPriors& priors) {
    check_binary(params, data, priors);
    const BinaryPuTerms t = binary_pu_terms(params, data, kind);
    const double pi_pos = priors.positive_total();
    return pi_pos * t.pos_risk + std::max(0.0, t.neg_risk_unl - pi_pos * t.neg_risk_pos);
}

double risk_value(Method method, const ScorerParams& params, const MpuDataset& data,
                  LossKind kind, const ClassPriors& priors, const SievedIndices* sieved) {
    switch (method) {
        case Method::Upu: return upu_empirical_risk(params, data, kind, priors);
        case Method::Nnpu: return nnpu_empirical_risk(params, data, kind, priors);
        case Method::Mpu: return mpu_empirical_risk(params, data, kind, priors);
        case Method::Nmpu: return nmpu_empirical_risk(params, data, kind, priors);
        case Method::Esa:
            return sieved ? esa_empirical_risk(params, data, kind, *sieved, priors)
                          : esa_empirical_risk(params, data, kind, all_indices(data), priors);
        case Method::EsaConvex:
            return sieved
                       ? esa_empirical_risk_convex(params, data, kind, *sieved, priors)
                       : esa_empirical_risk_convex(params, data, kind, all_indices(data), priors);
    }
    throw InvalidInputError("unknown method");
}

namespace {

// One stream of the stacked gradient pass: rows of a source block together
// with the weight w in  w * mean_rows(term)  and how to differentiate the
// per-example term with respect to its score row.
enum class TermKind { MpuLabeled, ConvexLabeled, NmpuLabeled, Unlabeled, BinaryLabeled,
                      BinaryUnlabeled };

struct Stream {
    const Matrix* block;
    std::vector<int> rows;
    double weight;
    TermKind term;
    int label;  // labeled class in 1..C-1 where applicable
};

void fill_dscores(Matrix& dscores, Eigen::Index row0, const Stream& s, LossKind kind,
                  const Matrix& scores, bool include_binary_correction) {
    const Eigen::Index n = static_cast<Eigen::Index>(s.rows.size());
    const Eigen::Index c = dscores.cols();
    const Eigen::Index last = c - 1;
    const double scale = s.weight / static_cast<double>(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index out = row0 + r;
        switch (s.term) {
            case TermKind::MpuLabeled: {
                const Eigen::Index y = s.label - 1;
                dscores(out, y) = scale * (phi_grad(kind, scores(out, y)) +
                                           phi_grad(kind, -scores(out, y)));
                dscores(out, last) = -scale * (phi_grad(kind, scores(out, last)) +
                                               phi_grad(kind, -scores(out, last)));
                break;
            }
            case TermKind::ConvexLabeled:
                dscores(out, s.label - 1) = -scale;
                dscores(out, last) = scale;
                break;
            case TermKind::NmpuLabeled: {
                const Eigen::Index y = s.label - 1;
                dscores(out, y) = scale * 2.0 * phi_grad(kind, scores(out, y));
                dscores(out, last) = -scale * 2.0 * phi_grad(kind, -scores(out, last));
                break;
            }
            case TermKind::Unlabeled:
                for (Eigen::Index k = 0; k < c; ++k) {
                    dscores(out, k) = (k == last)
                                          ? scale * phi_grad(kind, scores(out, k))
                                          : -scale * phi_grad(kind, -scores(out, k));
                }
                break;
            case TermKind::BinaryLabeled: {
                const double g = scores(out, 0) - scores(out, 1);
                double dg = phi_grad(kind, g);
                if (include_binary_correction) dg += phi_grad(kind, -g);
                dscores(out, 0) = scale * dg;
                dscores(out, 1) = -scale * dg;
                break;
            }
            case TermKind::BinaryUnlabeled: {
                if (!include_binary_correction) break;
                const double g = scores(out, 0) - scores(out, 1);
                const double dg = -phi_grad(kind, -g);
                dscores(out, 0) = scale * dg;
                dscores(out, 1) = -scale * dg;
                break;
            }
        }
    }
}

std::vector<int> resolve_rows(const Matrix& block, const std::vector<int>* batch,
                              const std::vector<int>* kept, const char* what) {
    if (batch) {
        if (batch->empty()) throw InvalidInputError(std::string("empty batch: ") + what);
        for (int r : *batch) {
            if (r < 0 || r >= block.rows()) {
                throw InvalidInputError(std::string(what) + ": batch row " + std::to_string(r) +
                                        " outside 0.." + std::to_string(block.rows() - 1));
            }
        }
        return *batch;
    }
    if (kept) return *kept;
    std::vector<int> rows(static_cast<std::size_t>(block.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

}  // namespace

ParamGrads risk_gradient(Method method, const ScorerParams& params, const MpuDataset& data,
                         LossKind kind, const ClassPriors& priors,
                         const SievedIndices* sieved, const Batch* batch,
                         double* nnpu_correction_out) {
    const bool binary = (method == Method::Upu || method == Method::Nnpu);
    if (binary) {
        check_binary(params, data, priors);
    } else {
        check_multiclass(params, data, priors);
    }
    if (method == Method::EsaConvex && !is_linear_odd(kind)) {
        throw ConfigError(std::string("the convex form needs a linear-odd loss; ") +
                          loss_name(kind) + " is not");
    }
    const bool uses_sieve = (method == Method::Esa || method == Method::EsaConvex);
    if (uses_sieve && sieved) check_sieved_shape(*sieved, data);
    if (batch && batch->labeled.size() != data.labeled.size()) {
        throw InvalidInputError("batch covers " + std::to_string(batch->labeled.size()) +
                                " labeled classes, dataset has " +
                                std::to_string(data.labeled.size()));
    }

    const int n_pos = static_cast<int>(data.labeled.size());
    Eigen::Index n_m_total = 0;
    for (const auto& block : data.labeled) n_m_total += block.rows();

    std::vector<Stream> streams;
    for (int i = 0; i < n_pos; ++i) {
        Stream s;
        s.block = &data.labeled[static_cast<std::size_t>(i)];
        s.rows = resolve_rows(*s.block, batch ? &batch->labeled[std::size_t(i)] : nullptr,
                              (uses_sieve && sieved) ? &sieved->labeled[std::size_t(i)] : nullptr,
                              "labeled class");
        s.label = i + 1;
        switch (method) {
            case Method::Mpu:
            case Method::Esa:
                s.weight = priors[i];
                s.term = TermKind::MpuLabeled;
                break;
            case Method::EsaConvex:
                s.weight = priors[i];
                s.term = TermKind::ConvexLabeled;
                break;
            case Method::Nmpu:
                s.weight = priors[i];
                s.term = TermKind::NmpuLabeled;
                break;
            case Method::Upu:
            case Method::Nnpu:
                s.weight = priors.positive_total() *
                           static_cast<double>(s.block->rows()) / static_cast<double>(n_m_total);
                s.term = TermKind::BinaryLabeled;
                break;
        }
        streams.push_back(std::move(s));
    }
    {
        Stream s;
        s.block = &data.unlabeled;
        s.rows = resolve_rows(*s.block, batch ? &batch->unlabeled : nullptr,
                              (uses_sieve && sieved) ? &sieved->unlabeled : nullptr,
                              "unlabeled");
        s.label = 0;
        s.weight = 1.0;
        s.term = binary ? TermKind::BinaryUnlabeled : TermKind::Unlabeled;
        streams.push_back(std::move(s));
    }

    Eigen::Index total_rows = 0;
    for (const auto& s : streams) total_rows += static_cast<Eigen::Index>(s.rows.size());
    Matrix x(total_rows, data.dim());
    Eigen::Index at = 0;
    for (const auto& s : streams) {
        for (int r : s.rows) x.row(at++) = s.block->row(r);
    }

    const ForwardTrace trace = forward_trace(params, x);

    // nnPU includes the unlabeled-minus-positive correction only while the
    // batch estimate of that correction is non-negative. Stream weights for
    // labeled blocks already carry pi+ * n_i/n_m, so the weighted per-stream
    // means below reproduce pi+ * mean-over-merged-positives.
    bool include_binary_correction = true;
    if (method == Method::Nnpu) {
        double neg_pos = 0.0, neg_unl = 0.0;
        Eigen::Index row = 0;
        for (const auto& s : streams) {
            double sum = 0.0;
            for (std::size_t i = 0; i < s.rows.size(); ++i) {
                const double g = trace.scores(row + Eigen::Index(i), 0) -
                                 trace.scores(row + Eigen::Index(i), 1);
                sum += phi(kind, -g);
            }
            const double mean = sum / static_cast<double>(s.rows.size());
            if (s.term == TermKind::BinaryLabeled) {
                neg_pos += s.weight * mean;
            } else {
                neg_unl = mean;
            }
            row += static_cast<Eigen::Index>(s.rows.size());
        }
        include_binary_correction = (neg_unl - neg_pos) >= 0.0;
        if (nnpu_correction_out) *nnpu_correction_out = neg_unl - neg_pos;
    }

    Matrix dscores = Matrix::Zero(total_rows, params.class_count());
    at = 0;
    for (const auto& s : streams) {
        fill_dscores(dscores, at, s, kind, trace.scores, include_binary_correction);
        at += static_cast<Eigen::Index>(s.rows.size());
    }
    return backward(params, trace, dscores);
}

int predict(const ScorerParams& params, const Vector& x) {
    const Vector scores = forward(params, x);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) best = k;
    }
    return static_cast<int>(best) + 1;
}

}  // namespace esa
