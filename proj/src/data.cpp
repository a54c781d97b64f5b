#include "esa/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>

#include "esa/errors.hpp"

namespace esa {

ClassPriors::ClassPriors(Vector pi) : pi_(std::move(pi)) {
    if (pi_.size() < 1) throw InvalidInputError("priors need at least one positive class");
    for (Eigen::Index i = 0; i < pi_.size(); ++i) {
        if (!std::isfinite(pi_[i]) || pi_[i] <= 0.0 || pi_[i] >= 1.0) {
            throw InvalidInputError("prior " + std::to_string(i + 1) + " = " +
                                    std::to_string(pi_[i]) + " outside (0,1)");
        }
    }
    if (pi_.sum() >= 1.0) {
        throw InvalidInputError("positive priors sum to " + std::to_string(pi_.sum()) +
                                ", leaving no negative mass");
    }
}

void MpuDataset::validate() const {
    if (labeled.empty()) throw ConfigError("dataset has no labeled positive classes");
    if (priors.positive_count() != static_cast<int>(labeled.size())) {
        throw ConfigError("priors cover " + std::to_string(priors.positive_count()) +
                          " classes but dataset has " + std::to_string(labeled.size()));
    }
    if (unlabeled.rows() < 1) throw ConfigError("unlabeled set is empty");
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        if (labeled[i].rows() < 1) {
            throw ConfigError("labeled class " + std::to_string(i + 1) + " is empty");
        }
        if (labeled[i].cols() != unlabeled.cols()) {
            throw ShapeError("labeled class " + std::to_string(i + 1) + " has dim " +
                             std::to_string(labeled[i].cols()) + ", unlabeled has " +
                             std::to_string(unlabeled.cols()));
        }
    }
}

void DiscreteDomain::validate() const {
    if (points.rows() < 1) throw InvalidInputError("domain has no points");
    if (joint_pmf.rows() != points.rows()) {
        throw ShapeError("joint pmf rows do not match domain points");
    }
    if (joint_pmf.cols() < 2) throw InvalidInputError("domain needs at least 2 classes");
    if ((joint_pmf.array() < 0.0).any()) throw InvalidInputError("joint pmf has negative mass");
    if (std::abs(joint_pmf.sum() - 1.0) > 1e-9) {
        throw InvalidInputError("joint pmf sums to " + std::to_string(joint_pmf.sum()));
    }
    const Vector marg = joint_pmf.colwise().sum();
    for (Eigen::Index c = 0; c < marg.size(); ++c) {
        if (marg[c] <= 0.0) {
            throw InvalidInputError("class " + std::to_string(c + 1) + " has zero marginal");
        }
    }
}

Vector DiscreteDomain::class_marginals() const {
    return joint_pmf.colwise().sum().transpose();
}

Vector enumerate_domain(const DiscreteDomain& domain, int y) {
    domain.validate();
    const int c = domain.class_count();
    if (y == kUnlabeledMarginal) {
        return domain.joint_pmf.rowwise().sum();
    }
    if (y < 1 || y > c) {
        throw InvalidInputError("class " + std::to_string(y) + " outside 1.." +
                                std::to_string(c));
    }
    const double marginal = domain.joint_pmf.col(y - 1).sum();
    return domain.joint_pmf.col(y - 1) / marginal;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw IoError("unexpected end of file: " + path);
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open image file: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open label file: " + labels_path);

    const std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != kImageMagic) {
        throw FormatError("bad image magic 0x" + std::to_string(img_magic) + " in " +
                          images_path);
    }
    const std::uint32_t n_img = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);

    const std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != kLabelMagic) {
        throw FormatError("bad label magic 0x" + std::to_string(lab_magic) + " in " +
                          labels_path);
    }
    const std::uint32_t n_lab = read_be32(lab, labels_path);
    if (n_img != n_lab) {
        throw FormatError("image count " + std::to_string(n_img) + " != label count " +
                          std::to_string(n_lab));
    }
    if (n_img == 0) throw FormatError("empty dataset: " + images_path);

    const std::size_t d = std::size_t(rows) * cols;
    std::vector<unsigned char> pixel_buf(d);
    LabeledDataset data;
    data.features.resize(n_img, static_cast<Eigen::Index>(d));
    data.labels.resize(n_img);
    int max_label_byte = 0;
    for (std::uint32_t i = 0; i < n_img; ++i) {
        if (!img.read(reinterpret_cast<char*>(pixel_buf.data()), pixel_buf.size())) {
            throw IoError("image file truncated at example " + std::to_string(i) + ": " +
                          images_path);
        }
        for (std::size_t j = 0; j < d; ++j) {
            data.features(i, static_cast<Eigen::Index>(j)) = pixel_buf[j] / 255.0;
        }
        unsigned char y;
        if (!lab.read(reinterpret_cast<char*>(&y), 1)) {
            throw IoError("label file truncated at example " + std::to_string(i) + ": " +
                          labels_path);
        }
        data.labels[i] = int(y) + 1;
        max_label_byte = std::max(max_label_byte, int(y));
    }
    data.class_count = max_label_byte + 1;
    return data;
}

void save_idx(const LabeledDataset& data, const std::string& images_path,
              const std::string& labels_path, int rows, int cols) {
    if (rows < 1 || cols < 1 || data.dim() != Eigen::Index(rows) * cols) {
        throw ShapeError("feature dim " + std::to_string(data.dim()) +
                         " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (data.size() < 1) throw InvalidInputError("refusing to write an empty dataset");
    for (int y : data.labels) {
        if (y < 1 || y > 256) {
            throw InvalidInputError("label " + std::to_string(y) +
                                    " not storable as a single byte");
        }
    }
    if ((data.features.array() < 0.0).any() || (data.features.array() > 1.0).any()) {
        throw InvalidInputError("features must lie in [0,1] for IDX export");
    }

    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open image file for writing: " + images_path);
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open label file for writing: " + labels_path);

    const auto n = static_cast<std::uint32_t>(data.size());
    write_be32(img, kImageMagic);
    write_be32(img, n);
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    write_be32(lab, kLabelMagic);
    write_be32(lab, n);

    std::vector<unsigned char> pixel_buf(static_cast<std::size_t>(data.dim()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) {
            pixel_buf[static_cast<std::size_t>(j)] =
                static_cast<unsigned char>(std::lround(data.features(i, j) * 255.0));
        }
        img.write(reinterpret_cast<const char*>(pixel_buf.data()), pixel_buf.size());
        const auto y = static_cast<unsigned char>(data.labels[i] - 1);
        lab.write(reinterpret_cast<const char*>(&y), 1);
    }
    if (!img || !lab) throw IoError("failed writing IDX files");
}

LabeledDataset synth_gaussian(const Matrix& means, double scale, int n_per_class,
                              std::uint64_t seed) {
    const int c = static_cast<int>(means.rows());
    if (c < 2) throw InvalidInputError("synth_gaussian needs at least 2 classes");
    if (means.cols() < 1) throw InvalidInputError("synth_gaussian needs dim >= 1");
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw InvalidInputError("scale must be finite and >= 0");
    }
    if (n_per_class < 1) throw InvalidInputError("n_per_class must be >= 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    LabeledDataset data;
    data.class_count = c;
    data.features.resize(Eigen::Index(c) * n_per_class, means.cols());
    data.labels.resize(static_cast<std::size_t>(c) * n_per_class);
    Eigen::Index row = 0;
    for (int y = 0; y < c; ++y) {
        for (int i = 0; i < n_per_class; ++i, ++row) {
            for (Eigen::Index j = 0; j < means.cols(); ++j) {
                data.features(row, j) = means(y, j) + scale * noise(rng);
            }
            data.labels[static_cast<std::size_t>(row)] = y + 1;
        }
    }
    return data;
}

LabeledDataset synth_image_blobs(int classes, int rows, int cols, int per_class,
                                 double separation, double noise, std::uint64_t seed) {
    if (classes < 2) throw InvalidInputError("synth_image_blobs needs at least 2 classes");
    if (rows < 4 || cols < 4) throw InvalidInputError("image must be at least 4x4");
    if (per_class < 1) throw InvalidInputError("per_class must be >= 1");
    if (!(separation >= 0.0 && separation <= 1.0)) {
        throw InvalidInputError("separation must lie in [0,1]");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw InvalidInputError("noise must be finite and >= 0");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    struct Bump {
        double r, c, s, a;
    };
    auto draw_bumps = [&](int count) {
        std::vector<Bump> bumps(static_cast<std::size_t>(count));
        for (auto& b : bumps) {
            b.r = unit(rng) * rows;
            b.c = unit(rng) * cols;
            b.s = 1.5 + unit(rng) * (std::min(rows, cols) / 4.0);
            b.a = 0.4 + 0.6 * unit(rng);
        }
        return bumps;
    };
    auto render = [&](const std::vector<Bump>& bumps, double dr, double dc, Matrix& out) {
        for (const auto& b : bumps) {
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const double yr = r - (b.r + dr), xc = c - (b.c + dc);
                    out(r, c) += b.a * std::exp(-(yr * yr + xc * xc) / (2.0 * b.s * b.s));
                }
            }
        }
    };

    const auto shared_bumps = draw_bumps(10);
    std::vector<std::vector<Bump>> class_bumps;
    for (int k = 0; k < classes; ++k) class_bumps.push_back(draw_bumps(8));

    const int d = rows * cols;
    LabeledDataset data;
    data.class_count = classes;
    data.features.resize(Eigen::Index(classes) * per_class, d);
    data.labels.resize(static_cast<std::size_t>(classes) * per_class);
    std::uniform_int_distribution<int> shift(-2, 2);

    Eigen::Index row_at = 0;
    Matrix img(rows, cols);
    for (int k = 0; k < classes; ++k) {
        for (int i = 0; i < per_class; ++i, ++row_at) {
            const double dr = shift(rng), dc = shift(rng);
            img.setZero();
            render(shared_bumps, dr, dc, img);
            img *= (1.0 - separation);
            Matrix cls = Matrix::Zero(rows, cols);
            render(class_bumps[static_cast<std::size_t>(k)], dr, dc, cls);
            img += separation * cls;
            const double gain = 0.7 + 0.6 * unit(rng);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const double v = gain * img(r, c) + noise * gauss(rng);
                    data.features(row_at, Eigen::Index(r) * cols + c) =
                        std::clamp(v, 0.0, 1.0);
                }
            }
            data.labels[static_cast<std::size_t>(row_at)] = k + 1;
        }
    }
    return data;
}

namespace {

std::vector<std::vector<int>> rows_by_label(const LabeledDataset& source) {
    std::vector<std::vector<int>> by_label(static_cast<std::size_t>(source.class_count) + 1);
    for (Eigen::Index i = 0; i < source.size(); ++i) {
        const int y = source.labels[static_cast<std::size_t>(i)];
        if (y < 1 || y > source.class_count) {
            throw InvalidInputError("source label " + std::to_string(y) + " outside 1.." +
                                    std::to_string(source.class_count));
        }
        by_label[static_cast<std::size_t>(y)].push_back(static_cast<int>(i));
    }
    return by_label;
}

Matrix gather_rows(const Matrix& src, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
    return out;
}

}  // namespace

MpuSplit build_mpu_split(const LabeledDataset& source,
                         const std::vector<int>& positive_labels, int negative_label,
                         int n_labeled, int n_unlabeled, std::uint64_t seed) {
    if (positive_labels.empty()) throw InvalidInputError("need at least one positive class");
    std::vector<int> all_classes = positive_labels;
    all_classes.push_back(negative_label);
    for (std::size_t i = 0; i < all_classes.size(); ++i) {
        for (std::size_t j = i + 1; j < all_classes.size(); ++j) {
            if (all_classes[i] == all_classes[j]) {
                throw InvalidInputError("selected classes must be distinct, got " +
                                        std::to_string(all_classes[i]) + " twice");
            }
        }
    }
    if (n_labeled < 1) throw InvalidInputError("n_labeled must be >= 1");
    if (n_unlabeled < 1) {
        throw CapacityError("unlabeled pool must be nonempty (n_unlabeled >= 1)");
    }

    auto by_label = rows_by_label(source);
    const int c = static_cast<int>(all_classes.size());
    std::vector<std::vector<int>> pool(static_cast<std::size_t>(c));
    double total = 0.0;
    for (int k = 0; k < c; ++k) {
        const int lbl = all_classes[static_cast<std::size_t>(k)];
        if (lbl < 1 || lbl > source.class_count ||
            by_label[static_cast<std::size_t>(lbl)].empty()) {
            throw InvalidInputError("class " + std::to_string(lbl) +
                                    " not present in the source dataset");
        }
        pool[static_cast<std::size_t>(k)] = by_label[static_cast<std::size_t>(lbl)];
        total += static_cast<double>(pool[static_cast<std::size_t>(k)].size());
    }

    // Priors are the true class frequencies of the selected subpopulation.
    Vector pi(c - 1);
    for (int k = 0; k + 1 < c; ++k) {
        pi[k] = static_cast<double>(pool[static_cast<std::size_t>(k)].size()) / total;
    }
    ClassPriors priors(pi);

    std::mt19937_64 rng(seed);
    for (auto& p : pool) std::shuffle(p.begin(), p.end(), rng);

    // Labeled sets: the first n_labeled of each shuffled positive class.
    std::vector<std::size_t> used(static_cast<std::size_t>(c), 0);
    std::vector<Matrix> labeled;
    for (int k = 0; k + 1 < c; ++k) {
        auto& p = pool[static_cast<std::size_t>(k)];
        if (p.size() < static_cast<std::size_t>(n_labeled)) {
            throw CapacityError("class " + std::to_string(all_classes[std::size_t(k)]) +
                                " has " + std::to_string(p.size()) + " examples, need " +
                                std::to_string(n_labeled) + " labeled");
        }
        labeled.push_back(gather_rows(
            source.features, {p.begin(), p.begin() + n_labeled}));
        used[static_cast<std::size_t>(k)] = static_cast<std::size_t>(n_labeled);
    }

    // Unlabeled pool: class counts drawn from the subpopulation frequencies,
    // examples taken from the not-yet-used remainder of each class.
    std::vector<double> weights(static_cast<std::size_t>(c));
    for (int k = 0; k + 1 < c; ++k) weights[static_cast<std::size_t>(k)] = priors[k];
    weights[static_cast<std::size_t>(c) - 1] = priors.negative();
    std::discrete_distribution<int> class_draw(weights.begin(), weights.end());
    std::vector<int> demand(static_cast<std::size_t>(c), 0);
    for (int i = 0; i < n_unlabeled; ++i) ++demand[static_cast<std::size_t>(class_draw(rng))];

    std::vector<int> unlabeled_rows;
    unlabeled_rows.reserve(static_cast<std::size_t>(n_unlabeled));
    for (int k = 0; k < c; ++k) {
        auto& p = pool[static_cast<std::size_t>(k)];
        const std::size_t have = p.size() - used[static_cast<std::size_t>(k)];
        const auto want = static_cast<std::size_t>(demand[static_cast<std::size_t>(k)]);
        if (want > have) {
            throw CapacityError("class " + std::to_string(all_classes[std::size_t(k)]) +
                                " has " + std::to_string(have) +
                                " examples left for the unlabeled pool, need " +
                                std::to_string(want));
        }
        unlabeled_rows.insert(unlabeled_rows.end(),
                              p.begin() + static_cast<std::ptrdiff_t>(used[std::size_t(k)]),
                              p.begin() + static_cast<std::ptrdiff_t>(used[std::size_t(k)] + want));
        used[static_cast<std::size_t>(k)] += want;
    }

    MpuSplit split{MpuDataset{std::move(labeled), gather_rows(source.features, unlabeled_rows),
                              priors},
                   LabeledDataset{}};

    // Test set: everything not consumed above, relabeled 1..C with C negative.
    std::vector<int> test_rows;
    std::vector<int> test_labels;
    for (int k = 0; k < c; ++k) {
        const auto& p = pool[static_cast<std::size_t>(k)];
        for (std::size_t i = used[static_cast<std::size_t>(k)]; i < p.size(); ++i) {
            test_rows.push_back(p[i]);
            test_labels.push_back(k + 1);
        }
    }
    split.test.features = gather_rows(source.features, test_rows);
    split.test.labels = std::move(test_labels);
    split.test.class_count = c;
    split.train.validate();
    return split;
}

ClassPriors perturb_priors(const ClassPriors& priors, double theta) {
    if (!std::isfinite(theta) || theta <= 0.0) {
        throw InvalidInputError("theta must be finite and > 0, got " + std::to_string(theta));
    }
    Vector scaled = theta * priors.positives();
    if (scaled.sum() >= 1.0) {
        throw InvalidInputError("theta = " + std::to_string(theta) +
                                " scales positive priors to " + std::to_string(scaled.sum()) +
                                " >= 1");
    }
    return ClassPriors(std::move(scaled));
}

LabeledDataset shift_test_distribution(const LabeledDataset& test, double mu,
                                       std::uint64_t seed) {
    if (test.size() < 1) throw InvalidInputError("test set is empty");
    if (!std::isfinite(mu) || mu <= 0.0) {
        throw InvalidInputError("mu must be finite and > 0, got " + std::to_string(mu));
    }
    const int c = test.class_count;
    if (c < 2) throw InvalidInputError("test set needs at least 2 classes");

    auto by_label = rows_by_label(test);
    const auto n = static_cast<double>(test.size());
    double pos_mass = 0.0;
    for (int y = 1; y < c; ++y) {
        pos_mass += static_cast<double>(by_label[static_cast<std::size_t>(y)].size()) / n;
    }
    if (mu * pos_mass >= 1.0) {
        throw InvalidInputError("mu = " + std::to_string(mu) +
                                " scales positive test mass to " + std::to_string(mu * pos_mass) +
                                " >= 1");
    }
    if (by_label[static_cast<std::size_t>(c)].empty()) {
        throw InvalidInputError("test set has no negative examples to absorb the shift");
    }

    std::vector<double> weights(static_cast<std::size_t>(c));
    for (int y = 1; y < c; ++y) {
        weights[static_cast<std::size_t>(y) - 1] =
            mu * static_cast<double>(by_label[static_cast<std::size_t>(y)].size()) / n;
    }
    weights[static_cast<std::size_t>(c) - 1] = 1.0 - mu * pos_mass;

    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> class_draw(weights.begin(), weights.end());
    LabeledDataset shifted;
    shifted.class_count = c;
    shifted.features.resize(test.size(), test.dim());
    shifted.labels.resize(static_cast<std::size_t>(test.size()));
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        const int y = class_draw(rng) + 1;
        const auto& pool = by_label[static_cast<std::size_t>(y)];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        shifted.features.row(i) = test.features.row(pool[pick(rng)]);
        shifted.labels[static_cast<std::size_t>(i)] = y;
    }
    return shifted;
}

}  // namespace esa
