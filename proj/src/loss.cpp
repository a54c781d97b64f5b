#include "esa/loss.hpp"

#include <cmath>

namespace esa {

namespace {

void require_finite(double z) {
    if (!std::isfinite(z)) {
        throw InvalidInputError("loss argument must be finite, got " + std::to_string(z));
    }
}

void require_label(const Vector& scores, int y, int max_label, const char* what) {
    const int c = static_cast<int>(scores.size());
    if (c < 2) {
        throw InvalidInputError(std::string(what) + ": need at least 2 scores, got " +
                                std::to_string(c));
    }
    if (y < 1 || y > max_label) {
        throw InvalidInputError(std::string(what) + ": label " + std::to_string(y) +
                                " outside 1.." + std::to_string(max_label));
    }
}

}  // namespace

const char* loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::SquareQuarter: return "square-quarter";
        case LossKind::Logistic: return "logistic";
        case LossKind::MarginSquare: return "margin-square";
    }
    throw InvalidInputError("unknown loss kind");
}

LossKind loss_from_name(const std::string& name) {
    if (name == "square-quarter") return LossKind::SquareQuarter;
    if (name == "logistic") return LossKind::Logistic;
    if (name == "margin-square") return LossKind::MarginSquare;
    throw ConfigError("unknown loss '" + name +
                      "' (expected square-quarter, logistic, or margin-square)");
}

bool is_linear_odd(LossKind kind) {
    return kind == LossKind::SquareQuarter || kind == LossKind::Logistic;
}

double phi(LossKind kind, double z) {
    require_finite(z);
    switch (kind) {
        case LossKind::SquareQuarter: {
            const double m = 1.0 - z;
            return 0.25 * m * m;
        }
        case LossKind::Logistic:
            // log(1 + exp(-z)) evaluated so that phi(z) - phi(-z) = -z holds
            // exactly and large |z| cannot overflow.
            return std::log1p(std::exp(-std::abs(z))) + std::max(-z, 0.0);
        case LossKind::MarginSquare: {
            const double m = 1.0 - z;
            return m * m;
        }
    }
    throw InvalidInputError("unknown loss kind");
}

double phi_grad(LossKind kind, double z) {
    require_finite(z);
    switch (kind) {
        case LossKind::SquareQuarter:
            return 0.5 * (z - 1.0);
        case LossKind::Logistic:
            return -1.0 / (1.0 + std::exp(z));
        case LossKind::MarginSquare:
            return 2.0 * (z - 1.0);
    }
    throw InvalidInputError("unknown loss kind");
}

double ovr_loss(LossKind kind, const Vector& scores, int y) {
    require_label(scores, y, static_cast<int>(scores.size()), "ovr_loss");
    const int c = static_cast<int>(scores.size());
    double total = phi(kind, scores[y - 1]);
    for (int k = 0; k < c; ++k) {
        if (k != y - 1) total += phi(kind, -scores[k]);
    }
    return total;
}

Vector ovr_loss_grad(LossKind kind, const Vector& scores, int y) {
    require_label(scores, y, static_cast<int>(scores.size()), "ovr_loss_grad");
    const int c = static_cast<int>(scores.size());
    Vector g(c);
    for (int k = 0; k < c; ++k) {
        g[k] = (k == y - 1) ? phi_grad(kind, scores[k]) : -phi_grad(kind, -scores[k]);
    }
    return g;
}

double certain_loss_labeled(LossKind kind, const Vector& scores, int y) {
    require_label(scores, y, static_cast<int>(scores.size()) - 1, "certain_loss_labeled");
    const int c = static_cast<int>(scores.size());
    return ovr_loss(kind, scores, y) - ovr_loss(kind, scores, c);
}

double certain_loss_unlabeled(LossKind kind, const Vector& scores) {
    return ovr_loss(kind, scores, static_cast<int>(scores.size()));
}

}  // namespace esa
