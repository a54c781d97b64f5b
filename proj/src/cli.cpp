#include "esa/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "esa/errors.hpp"
#include "esa/verify.hpp"

namespace esa {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string sanitize(std::string name) {
    std::replace(name.begin(), name.end(), ',', '_');
    return name;
}

// Runs fn(0..count-1), optionally on worker threads. Exceptions are
// captured per index; the first one is rethrown unless the caller wants
// them (sweep skips failed axis values instead of aborting).
void parallel_for(int jobs, int count, const std::function<void(int)>& fn,
                  std::vector<std::exception_ptr>* errors_out = nullptr) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[static_cast<std::size_t>(i)] = std::current_exception();
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    if (errors_out) {
        *errors_out = std::move(errors);
        return;
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

LabeledDataset load_source(const RunConfig& cfg) {
    if (cfg.dataset == "idx") return load_idx(cfg.images, cfg.labels);
    if (cfg.synth_classes < 2) throw ConfigError("synth_classes must be >= 2");
    if (cfg.synth_dim < 1) throw ConfigError("synth_dim must be >= 1");
    std::mt19937_64 rng(cfg.train.seed ^ 0xC0FFEE5EEDULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix means(cfg.synth_classes, cfg.synth_dim);
    for (Eigen::Index r = 0; r < means.rows(); ++r) {
        for (Eigen::Index c = 0; c < means.cols(); ++c) {
            means(r, c) = cfg.synth_spread * gauss(rng);
        }
    }
    return synth_gaussian(means, cfg.synth_scale, cfg.synth_per_class, rng());
}

struct RepeatResult {
    std::vector<std::string> rows;
    double final_accuracy = 0.0;
    std::uint64_t seed = 0;
};

RepeatResult run_repeat(const RunConfig& cfg, const LabeledDataset& source, int repeat) {
    const std::uint64_t seed = cfg.train.seed + static_cast<std::uint64_t>(repeat);
    std::vector<int> positives;
    positives.reserve(cfg.positive_classes.size());
    for (int c : cfg.positive_classes) positives.push_back(c + 1);

    MpuSplit split = build_mpu_split(source, positives, cfg.negative_class + 1,
                                     cfg.n_labeled, cfg.n_unlabeled, seed);
    MpuDataset train_data = std::move(split.train);
    if (cfg.theta != 1.0) train_data.priors = perturb_priors(train_data.priors, cfg.theta);
    LabeledDataset test = std::move(split.test);
    if (cfg.mu != 1.0) test = shift_test_distribution(test, cfg.mu, seed);

    TrainConfig tc = cfg.train;
    tc.seed = seed;
    const TrainResult result = train(tc, train_data, test);

    RepeatResult out;
    out.seed = seed;
    const std::string prefix = std::string(method_name(tc.method)) + "," +
                               sanitize(cfg.name) + "," + std::to_string(seed) + ",";
    const std::string suffix = "," + fmt(cfg.theta) + "," + fmt(cfg.mu) + "," +
                               fmt(tc.thresholds.sigma_m) + "," + fmt(tc.thresholds.sigma_u);
    for (const EpochRecord& rec : result.epochs) {
        int n_m_s = 0;
        for (int k : rec.kept_labeled) n_m_s += k;
        std::ostringstream row;
        row << prefix << rec.epoch << ',' << fmt(rec.train_risk) << ','
            << fmt(rec.test_accuracy) << ',' << fmt(rec.negative_accuracy) << ',' << n_m_s
            << ',' << rec.kept_unlabeled << suffix;
        out.rows.push_back(row.str());
    }
    out.final_accuracy = result.epochs.back().test_accuracy;
    return out;
}

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample stddev, 0 for a single value
};

Summary summarize(const std::vector<double>& values) {
    Summary s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::mutex log_mutex;

}  // namespace

std::string csv_header() {
    return "method,dataset,seed,epoch,train_risk,test_acc,neg_acc,n_m_s,n_u_s,theta,mu,"
           "sigma_m,sigma_u";
}

int cmd_run(const std::string& config_path, const CliOptions& opts) {
    RunConfig cfg = load_run_config(config_path);
    if (!opts.output.empty()) cfg.output = opts.output;
    const LabeledDataset source = load_source(cfg);

    std::vector<RepeatResult> results(static_cast<std::size_t>(cfg.repeats));
    parallel_for(opts.jobs, cfg.repeats, [&](int r) {
        results[static_cast<std::size_t>(r)] = run_repeat(cfg, source, r);
        if (!opts.quiet) {
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << method_name(cfg.train.method) << " seed "
                      << results[std::size_t(r)].seed << ": final acc "
                      << fmt(results[std::size_t(r)].final_accuracy) << "\n";
        }
    });

    std::ofstream out(cfg.output);
    if (!out) throw IoError("cannot open output file: " + cfg.output);
    out << csv_header() << '\n';
    std::vector<double> finals;
    for (const auto& res : results) {
        for (const auto& row : res.rows) out << row << '\n';
        finals.push_back(res.final_accuracy);
    }
    if (!out) throw IoError("failed writing output file: " + cfg.output);

    const Summary s = summarize(finals);
    std::cout << "summary method=" << method_name(cfg.train.method)
              << " dataset=" << sanitize(cfg.name) << " repeats=" << cfg.repeats
              << " final_acc_mean=" << fmt(s.mean) << " final_acc_std=" << fmt(s.stddev)
              << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const CliOptions& opts) {
    RunConfig cfg = load_run_config(config_path);
    if (!opts.output.empty()) cfg.output = opts.output;
    if (cfg.axis != "theta" && cfg.axis != "mu" && cfg.axis != "sigma_m" &&
        cfg.axis != "sigma_u") {
        throw ConfigError("sweep needs axis = theta, mu, sigma_m, or sigma_u; got '" +
                          cfg.axis + "'");
    }
    if (cfg.axis_values.empty()) throw ConfigError("sweep needs a nonempty axis_values list");

    const LabeledDataset source = load_source(cfg);
    std::vector<RunConfig> point_cfgs;
    for (double v : cfg.axis_values) {
        RunConfig p = cfg;
        if (cfg.axis == "theta") p.theta = v;
        else if (cfg.axis == "mu") p.mu = v;
        else if (cfg.axis == "sigma_m") p.train.thresholds.sigma_m = v;
        else p.train.thresholds.sigma_u = v;
        point_cfgs.push_back(std::move(p));
    }

    const int n_points = static_cast<int>(point_cfgs.size());
    const int total_jobs = n_points * cfg.repeats;
    std::vector<RepeatResult> results(static_cast<std::size_t>(total_jobs));
    std::vector<std::exception_ptr> errors;
    parallel_for(opts.jobs, total_jobs, [&](int j) {
        const int point = j / cfg.repeats;
        const int repeat = j % cfg.repeats;
        results[static_cast<std::size_t>(j)] =
            run_repeat(point_cfgs[static_cast<std::size_t>(point)], source, repeat);
        if (!opts.quiet) {
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << cfg.axis << "=" << fmt(cfg.axis_values[std::size_t(point)])
                      << " seed " << results[std::size_t(j)].seed << ": final acc "
                      << fmt(results[std::size_t(j)].final_accuracy) << "\n";
        }
    }, &errors);

    std::ofstream out(cfg.output);
    if (!out) throw IoError("cannot open output file: " + cfg.output);
    out << csv_header() << '\n';
    int usable_points = 0;
    for (int point = 0; point < n_points; ++point) {
        std::exception_ptr failure;
        for (int r = 0; r < cfg.repeats && !failure; ++r) {
            failure = errors[static_cast<std::size_t>(point * cfg.repeats + r)];
        }
        if (failure) {
            std::string why = "unknown error";
            try {
                std::rethrow_exception(failure);
            } catch (const std::exception& e) {
                why = e.what();
            }
            std::cerr << "warning: skipping " << cfg.axis << " = "
                      << fmt(cfg.axis_values[static_cast<std::size_t>(point)]) << ": " << why
                      << "\n";
            continue;
        }
        ++usable_points;
        std::vector<double> finals;
        for (int r = 0; r < cfg.repeats; ++r) {
            const auto& res = results[static_cast<std::size_t>(point * cfg.repeats + r)];
            for (const auto& row : res.rows) out << row << '\n';
            finals.push_back(res.final_accuracy);
        }
        const Summary s = summarize(finals);
        std::cout << "summary " << cfg.axis << "="
                  << fmt(cfg.axis_values[static_cast<std::size_t>(point)])
                  << " repeats=" << cfg.repeats << " final_acc_mean=" << fmt(s.mean)
                  << " final_acc_std=" << fmt(s.stddev) << "\n";
    }
    if (!out) throw IoError("failed writing output file: " + cfg.output);
    if (usable_points == 0) {
        throw ConfigError("every sweep point failed; nothing to write");
    }
    return 0;
}

int cmd_gen_data(const std::string& config_path, const CliOptions& opts) {
    const GenConfig cfg = load_gen_config(config_path);
    const LabeledDataset data = synth_image_blobs(cfg.classes, cfg.rows, cfg.cols,
                                                  cfg.per_class, cfg.separation, cfg.noise,
                                                  cfg.seed);
    save_idx(data, cfg.images, cfg.labels, cfg.rows, cfg.cols);
    if (!opts.quiet) {
        std::cout << "wrote " << data.size() << " examples (" << cfg.classes << " classes, "
                  << cfg.rows << "x" << cfg.cols << ") to " << cfg.images << " / "
                  << cfg.labels << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// verify suites
// ---------------------------------------------------------------------------

namespace {

struct Check {
    std::string name;
    std::string detail;
    bool pass;
};

MpuDataset random_mpu(std::mt19937_64& rng, int c, int d, int n_per, int n_u) {
    std::normal_distribution<double> gauss(0.0, 1.5);
    std::vector<Matrix> labeled;
    for (int i = 0; i + 1 < c; ++i) {
        Matrix block(n_per, d);
        for (Eigen::Index r = 0; r < block.rows(); ++r) {
            for (Eigen::Index j = 0; j < d; ++j) block(r, j) = gauss(rng);
        }
        labeled.push_back(std::move(block));
    }
    Matrix unlabeled(n_u, d);
    for (Eigen::Index r = 0; r < unlabeled.rows(); ++r) {
        for (Eigen::Index j = 0; j < d; ++j) unlabeled(r, j) = gauss(rng);
    }
    Vector pi(c - 1);
    std::uniform_real_distribution<double> unit(0.2, 1.0);
    for (Eigen::Index i = 0; i < pi.size(); ++i) pi[i] = unit(rng);
    pi *= 0.85 / pi.sum();
    return MpuDataset{std::move(labeled), std::move(unlabeled), ClassPriors(pi)};
}

DiscreteDomain random_domain(std::mt19937_64& rng, int max_points, int max_classes) {
    std::uniform_int_distribution<int> pdist(2, max_points);
    std::uniform_int_distribution<int> cdist(2, max_classes);
    const int p = pdist(rng), c = cdist(rng);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DiscreteDomain domain;
    domain.points.resize(p, 3);
    for (Eigen::Index r = 0; r < p; ++r) {
        for (Eigen::Index j = 0; j < 3; ++j) domain.points(r, j) = gauss(rng);
    }
    domain.joint_pmf.resize(p, c);
    for (Eigen::Index r = 0; r < p; ++r) {
        for (Eigen::Index k = 0; k < c; ++k) domain.joint_pmf(r, k) = unit(rng);
    }
    domain.joint_pmf /= domain.joint_pmf.sum();
    return domain;
}

ScorerParams random_scorer(std::mt19937_64& rng, int d, int c, bool mlp) {
    ScorerSpec spec;
    spec.input_dim = d;
    spec.class_count = c;
    if (mlp) spec.hidden = {8};
    return init_params(spec, rng());
}

std::vector<Check> suite_identities() {
    std::vector<Check> checks;

    {
        double worst = 0.0;
        for (LossKind kind : {LossKind::SquareQuarter, LossKind::Logistic}) {
            for (int i = -1000; i <= 1000; ++i) {
                const double z = i * 0.01;
                worst = std::max(worst, std::abs(phi(kind, z) - phi(kind, -z) + z));
            }
        }
        checks.push_back({"linear-odd-grid", "max residual " + fmt(worst), worst < 1e-12});
    }
    {
        std::mt19937_64 rng(101);
        std::normal_distribution<double> gauss(0.0, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const int c = 2 + int(rng() % 4);
            Vector scores(c);
            for (Eigen::Index k = 0; k < c; ++k) scores[k] = gauss(rng);
            const int y = 1 + int(rng() % unsigned(c - 1));
            const LossKind kind = (t % 2 == 0) ? LossKind::SquareQuarter : LossKind::Logistic;
            const double cl = certain_loss_labeled(kind, scores, y);
            worst = std::max(worst, std::abs(cl - (scores[c - 1] - scores[y - 1])));
        }
        checks.push_back(
            {"certain-loss-cancellation", "max residual " + fmt(worst), worst < 1e-10});
    }
    {
        std::mt19937_64 rng(202);
        double worst_convex = 0.0, worst_sieve_off = 0.0, worst_nmpu = 0.0;
        std::normal_distribution<double> sigma_draw(0.0, 1.0);
        for (int t = 0; t < 100; ++t) {
            const int c = 2 + int(rng() % 4);
            const int d = 2 + int(rng() % 5);
            MpuDataset data = random_mpu(rng, c, d, 3 + int(rng() % 10), 5 + int(rng() % 16));
            const LossKind kind = (t % 2 == 0) ? LossKind::SquareQuarter : LossKind::Logistic;
            ScorerParams params = random_scorer(rng, d, c, t % 3 == 0);

            SieveThresholds thr{sigma_draw(rng), sigma_draw(rng)};
            const SievedIndices kept = sieve(params, data, kind, thr);
            const double esa = esa_empirical_risk(params, data, kind, kept, data.priors);
            const double convex =
                esa_empirical_risk_convex(params, data, kind, kept, data.priors);
            worst_convex = std::max(worst_convex, std::abs(esa - convex));

            const SievedIndices keep_all =
                sieve(params, data, kind, SieveThresholds{kSieveOff, kSieveOff});
            const double esa_off =
                esa_empirical_risk(params, data, kind, keep_all, data.priors);
            const double mpu = mpu_empirical_risk(params, data, kind, data.priors);
            worst_sieve_off = std::max(worst_sieve_off, std::abs(esa_off - mpu));

            // nmpu - mpu should equal the prior-weighted mean of
            // phi(fC) + phi(-fC) + phi(fi) + phi(-fi) over each labeled set.
            double expected = 0.0;
            for (std::size_t i = 0; i < data.labeled.size(); ++i) {
                const Matrix scores = forward_batch(params, data.labeled[i]);
                double sum = 0.0;
                for (Eigen::Index r = 0; r < scores.rows(); ++r) {
                    const double fi = scores(r, Eigen::Index(i));
                    const double fc = scores(r, scores.cols() - 1);
                    sum += phi(kind, fc) + phi(kind, -fc) + phi(kind, fi) + phi(kind, -fi);
                }
                expected += data.priors[int(i)] * sum / double(scores.rows());
            }
            const double nmpu = nmpu_empirical_risk(params, data, kind, data.priors);
            worst_nmpu = std::max(worst_nmpu, std::abs((nmpu - mpu) - expected));
        }
        checks.push_back(
            {"convex-equivalence", "max |esa - convex| " + fmt(worst_convex),
             worst_convex < 1e-9});
        checks.push_back(
            {"sieve-off-coincidence", "max |esa(-inf) - mpu| " + fmt(worst_sieve_off),
             worst_sieve_off < 1e-10});
        checks.push_back({"nmpu-difference-identity", "max residual " + fmt(worst_nmpu),
                          worst_nmpu < 1e-12});
    }
    {
        std::mt19937_64 rng(303);
        double worst_eq1 = 0.0, worst_eq2 = 0.0;
        for (int t = 0; t < 50; ++t) {
            const DiscreteDomain domain = random_domain(rng, 8, 5);
            ScorerParams params = random_scorer(rng, 3, domain.class_count(), t % 2 == 0);
            worst_eq1 = std::max(worst_eq1, check_eq1_decomposition(domain, params).residual);
            const LossKind kind = (t % 2 == 0) ? LossKind::SquareQuarter : LossKind::Logistic;
            worst_eq2 = std::max(worst_eq2,
                                 std::abs(exact_mpu_risk(domain, params, kind) -
                                          exact_supervised_ovr_risk(domain, params, kind)));
        }
        checks.push_back(
            {"zero-one-decomposition", "max residual " + fmt(worst_eq1), worst_eq1 < 1e-12});
        checks.push_back(
            {"supervised-rewrite", "max residual " + fmt(worst_eq2), worst_eq2 < 1e-12});
    }
    return checks;
}

std::vector<Check> suite_gradients() {
    std::vector<Check> checks;
    std::mt19937_64 rng(404);
    const int d = 5, c = 4;
    for (Method method : {Method::Upu, Method::Nnpu, Method::Mpu, Method::Nmpu, Method::Esa,
                          Method::EsaConvex}) {
        for (bool mlp : {false, true}) {
            MpuDataset data = random_mpu(rng, c, d, 6, 12);
            const bool binary = (method == Method::Upu || method == Method::Nnpu);
            const LossKind kind =
                (method == Method::EsaConvex) ? LossKind::Logistic : LossKind::MarginSquare;
            ScorerParams params = random_scorer(rng, d, binary ? 2 : c, mlp);
            SievedIndices kept;
            const SievedIndices* kept_ptr = nullptr;
            if (method == Method::Esa || method == Method::EsaConvex) {
                kept = sieve(params, data, kind, SieveThresholds{0.0, 1.0});
                kept_ptr = &kept;
            }
            const double tol = mlp ? 1e-5 : 1e-6;
            const GradientCheckReport rep =
                gradient_check(method, params, data, kind, data.priors, kept_ptr, tol);
            checks.push_back({std::string("gradient-") + method_name(method) +
                                  (mlp ? "-mlp" : "-linear"),
                              "max rel error " + fmt(rep.max_rel_error) +
                                  (rep.worst_coordinate.empty()
                                       ? ""
                                       : " at " + rep.worst_coordinate),
                              rep.pass});
        }
    }
    return checks;
}

// Fixed domain, scorer, and mid-range thresholds shared by the bias and
// decay suites.
struct BiasSetup {
    DiscreteDomain domain;
    ScorerParams params;
    SieveThresholds thresholds;
    LossKind kind = LossKind::SquareQuarter;
};

BiasSetup bias_setup() {
    std::mt19937_64 rng(424242);
    BiasSetup setup;
    setup.domain = random_domain(rng, 6, 3);
    while (setup.domain.class_count() != 3) setup.domain = random_domain(rng, 6, 3);
    ScorerSpec spec;
    spec.input_dim = 3;
    spec.class_count = 3;
    setup.params = init_params(spec, 7);
    for (auto& w : setup.params.weights) w *= 2.0;

    const Matrix scores = forward_batch(setup.params, setup.domain.points);
    std::vector<double> clm, clu;
    for (Eigen::Index p = 0; p < scores.rows(); ++p) {
        Vector row = scores.row(p).transpose();
        for (int i = 1; i < 3; ++i) clm.push_back(certain_loss_labeled(setup.kind, row, i));
        clu.push_back(certain_loss_unlabeled(setup.kind, row));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    setup.thresholds = {median(clm), median(clu)};
    return setup;
}

std::vector<Check> suite_bias() {
    std::vector<Check> checks;
    const BiasSetup setup = bias_setup();
    {
        const BiasReport rep = monte_carlo_bias(setup.domain, setup.params, setup.kind,
                                                setup.thresholds, 50, 50, 10000, 31337);
        const bool positive = rep.mean_bias - 3.0 * rep.std_error > 0.0;
        checks.push_back({"lemma2-positivity",
                          "mean " + fmt(rep.mean_bias) + " se " + fmt(rep.std_error) +
                              (rep.degenerate_threshold ? " (degenerate)" : ""),
                          positive && !rep.degenerate_threshold});
    }
    {
        const BiasReport rep =
            monte_carlo_bias(setup.domain, setup.params, setup.kind,
                             SieveThresholds{kSieveOff, kSieveOff}, 50, 50, 10000, 1337);
        const bool unbiased = std::abs(rep.mean_bias) <= 3.0 * rep.std_error;
        checks.push_back({"sieve-off-unbiased",
                          "mean " + fmt(rep.mean_bias) + " se " + fmt(rep.std_error) +
                              (rep.degenerate_threshold ? " (degenerate, as expected)" : ""),
                          unbiased && rep.degenerate_threshold});
    }
    return checks;
}

std::vector<Check> suite_decay() {
    std::vector<Check> checks;
    const BiasSetup setup = bias_setup();
    const BiasReport small = monte_carlo_bias(setup.domain, setup.params, setup.kind,
                                              setup.thresholds, 10, 10, 10000, 2023);
    const BiasReport large = monte_carlo_bias(setup.domain, setup.params, setup.kind,
                                              setup.thresholds, 1000, 1000, 10000, 2024);
    const double gap = small.mean_bias - large.mean_bias;
    const double noise = 3.0 * std::sqrt(small.std_error * small.std_error +
                                         large.std_error * large.std_error);
    checks.push_back({"bias-decay-trend",
                      "bias(n=10) " + fmt(small.mean_bias) + " bias(n=1000) " +
                          fmt(large.mean_bias) + " needs gap > " + fmt(noise),
                      gap > noise});
    return checks;
}

}  // namespace

int cmd_verify(const std::string& suite, const CliOptions& opts) {
    std::vector<Check> checks;
    if (suite == "identities") checks = suite_identities();
    else if (suite == "gradients") checks = suite_gradients();
    else if (suite == "bias") checks = suite_bias();
    else if (suite == "decay") checks = suite_decay();
    else if (suite == "all") {
        for (auto&& c : suite_identities()) checks.push_back(std::move(c));
        for (auto&& c : suite_gradients()) checks.push_back(std::move(c));
        for (auto&& c : suite_bias()) checks.push_back(std::move(c));
        for (auto&& c : suite_decay()) checks.push_back(std::move(c));
    } else {
        throw ConfigError("unknown verify suite '" + suite +
                          "' (expected identities, gradients, bias, decay, or all)");
    }

    std::ostringstream report;
    bool all_pass = true;
    for (const Check& c : checks) {
        report << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        all_pass = all_pass && c.pass;
    }
    std::cout << report.str();
    if (!opts.output.empty()) {
        std::ofstream out(opts.output);
        if (!out) throw IoError("cannot open output file: " + opts.output);
        out << report.str();
        if (!out) throw IoError("failed writing output file: " + opts.output);
    }
    return all_pass ? 0 : 1;
}

}  // namespace esa
