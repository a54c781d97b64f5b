#pragma once

#include <string>
#include <vector>

#include "esa/train.hpp"

namespace esa {

// Benchmark run description parsed from a flat `key = value` file
// (# starts a comment). Class ids are the raw ids stored in the source
// data (0-based; MNIST digits), shifted to 1-based labels internally.
struct RunConfig {
    std::string name;     // dataset tag for CSV rows; defaults to `dataset`
    std::string dataset;  // "idx" or "synth"
    std::string images, labels;

    int synth_classes = 4;
    int synth_dim = 8;
    int synth_per_class = 2000;
    double synth_scale = 1.0;
    double synth_spread = 2.0;

    std::vector<int> positive_classes;  // raw source ids
    int negative_class = -1;            // raw source id
    int n_labeled = 0;
    int n_unlabeled = 0;

    double theta = 1.0;
    double mu = 1.0;

    TrainConfig train;
    int repeats = 1;
    std::string output = "results.csv";

    // sweep subcommand only
    std::string axis;  // theta | mu | sigma_m | sigma_u
    std::vector<double> axis_values;
};

RunConfig load_run_config(const std::string& path);

// gen-data subcommand: synthesize an IDX image/label pair.
struct GenConfig {
    int classes = 10;
    int rows = 28;
    int cols = 28;
    int per_class = 2000;
    double separation = 0.75;
    double noise = 0.3;
    std::uint64_t seed = 7;
    std::string images, labels;
};

GenConfig load_gen_config(const std::string& path);

}  // namespace esa
