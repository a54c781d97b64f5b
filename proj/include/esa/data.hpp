#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esa/loss.hpp"

namespace esa {

// Fully labeled dataset; labels run 1..class_count.
struct LabeledDataset {
    Matrix features;          // n x d
    std::vector<int> labels;  // label of each row
    int class_count = 0;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

// Positive-class priors pi_1..pi_{C-1}; the negative prior is implied.
class ClassPriors {
  public:
    explicit ClassPriors(Vector pi);

    int positive_count() const { return static_cast<int>(pi_.size()); }
    int class_count() const { return positive_count() + 1; }
    double operator[](int i) const { return pi_[i]; }
    const Vector& positives() const { return pi_; }
    double positive_total() const { return pi_.sum(); }
    double negative() const { return 1.0 - pi_.sum(); }

  private:
    Vector pi_;
};

// Training-side data for multi-positive and unlabeled learning: one feature
// block per labeled positive class plus an unlabeled block, with the priors
// the risk estimators weight them by.
struct MpuDataset {
    std::vector<Matrix> labeled;  // C-1 blocks, n_i x d each
    Matrix unlabeled;             // n_u x d
    ClassPriors priors;

    int class_count() const { return static_cast<int>(labeled.size()) + 1; }
    Eigen::Index dim() const { return unlabeled.cols(); }
    void validate() const;
};

// Finite feature domain with an explicit joint distribution over
// (point, class); the ground truth for exact-risk enumeration.
struct DiscreteDomain {
    Matrix points;     // P x d
    Matrix joint_pmf;  // P x C

    int class_count() const { return static_cast<int>(joint_pmf.cols()); }
    Eigen::Index point_count() const { return points.rows(); }
    void validate() const;

    Vector class_marginals() const;  // length C
};

// Marker accepted by enumerate_domain in place of a class index.
inline constexpr int kUnlabeledMarginal = 0;

// Distribution over domain points: p(x|y) for y in 1..C, or the unlabeled
// marginal p_u(x) = sum_i pi_i p(x|y=i) for y = kUnlabeledMarginal.
Vector enumerate_domain(const DiscreteDomain& domain, int y);

// IDX-format readers/writers (big-endian, magic 0x803 images / 0x801 labels).
// Pixels are scaled to [0,1]; stored label bytes b become labels b+1.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);
void save_idx(const LabeledDataset& data, const std::string& images_path,
              const std::string& labels_path, int rows, int cols);

// Isotropic Gaussian blobs, one class per row of `means`, n_per_class each.
LabeledDataset synth_gaussian(const Matrix& means, double scale, int n_per_class,
                              std::uint64_t seed);

// MNIST-shaped synthetic images: each class is a smooth bump pattern blended
// from shared structure (weight 1 - separation) and class-specific structure
// (weight separation); examples add a random small translation, a gain
// jitter, and pixel noise, clamped to [0,1]. Deterministic for a given seed.
LabeledDataset synth_image_blobs(int classes, int rows, int cols, int per_class,
                                 double separation, double noise, std::uint64_t seed);

struct MpuSplit {
    MpuDataset train;
    LabeledDataset test;  // relabeled 1..C, negative = C
};

// Carves an MPU problem out of a labeled source: n_labeled examples per
// positive class, an unlabeled pool of n_unlabeled examples drawn by the
// selected subpopulation's true class frequencies (which are also the
// recorded priors), and the remainder as a relabeled test set. The three
// parts are disjoint.
MpuSplit build_mpu_split(const LabeledDataset& source,
                         const std::vector<int>& positive_labels, int negative_label,
                         int n_labeled, int n_unlabeled, std::uint64_t seed);

// theta * pi, unnormalized. Rejects perturbations that leave no negative
// mass (sum theta*pi_i >= 1).
ClassPriors perturb_priors(const ClassPriors& priors, double theta);

// Resamples a test set (with replacement) so each positive class frequency
// is scaled by mu and the negative class absorbs the remainder.
LabeledDataset shift_test_distribution(const LabeledDataset& test, double mu,
                                       std::uint64_t seed);

}  // namespace esa
