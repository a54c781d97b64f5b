#pragma once

#include <string>

#include "esa/config.hpp"

namespace esa {

struct CliOptions {
    std::string output;  // overrides the config's output path when nonempty
    int jobs = 1;
    bool quiet = false;
};

// Exact column set produced by run and sweep.
std::string csv_header();

// Exit codes: 0 success, 1 verification failure (cmd_verify only); input,
// config, or data problems surface as exceptions the caller maps to 2.
int cmd_run(const std::string& config_path, const CliOptions& opts);
int cmd_sweep(const std::string& config_path, const CliOptions& opts);
int cmd_verify(const std::string& suite, const CliOptions& opts);
int cmd_gen_data(const std::string& config_path, const CliOptions& opts);

}  // namespace esa
