#pragma once

#include <Eigen/Core>
#include <string>

#include "esa/errors.hpp"

namespace esa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Binary margin surrogates phi(z) penalizing small or negative margins.
// SquareQuarter and Logistic satisfy the linear-odd identity
// phi(z) - phi(-z) = -z; MarginSquare does not.
enum class LossKind {
    SquareQuarter,  // (1 - z)^2 / 4
    Logistic,       // log(1 + exp(-z))
    MarginSquare,   // (1 - z)^2
};

const char* loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);
bool is_linear_odd(LossKind kind);

// Surrogate value phi(z). Throws InvalidInputError on non-finite z.
double phi(LossKind kind, double z);

// Derivative phi'(z).
double phi_grad(LossKind kind, double z);

// One-versus-rest multiclass loss for a C-vector of scores and a label
// y in 1..C:  phi(f_y) + sum_{k != y} phi(-f_k).
double ovr_loss(LossKind kind, const Vector& scores, int y);

// Gradient of ovr_loss with respect to the scores.
Vector ovr_loss_grad(LossKind kind, const Vector& scores, int y);

// Certain loss of a labeled example (label y in 1..C-1):
// ovr_loss(scores, y) - ovr_loss(scores, C). Equals f_C - f_y exactly for
// linear-odd kinds.
double certain_loss_labeled(LossKind kind, const Vector& scores, int y);

// Certain loss of an unlabeled example: ovr_loss(scores, C).
double certain_loss_unlabeled(LossKind kind, const Vector& scores);

}  // namespace esa
