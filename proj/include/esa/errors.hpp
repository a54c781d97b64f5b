#pragma once

#include <stdexcept>
#include <string>

namespace esa {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite or out-of-domain numeric arguments, bad labels, empty batches,
// infeasible prior perturbations or test shifts.
struct InvalidInputError : Error {
    using Error::Error;
};

// Dimension mismatches between features, parameters, and scores.
struct ShapeError : Error {
    using Error::Error;
};

// Malformed run configurations, prior/class-count mismatches, estimators
// applied to scorers or losses they do not support.
struct ConfigError : Error {
    using Error::Error;
};

// Split requests that exceed the available example supply.
struct CapacityError : Error {
    using Error::Error;
};

// Malformed or inconsistent data files (bad magic, count mismatch).
struct FormatError : Error {
    using Error::Error;
};

// Filesystem failures (unreadable, truncated, unwritable).
struct IoError : Error {
    using Error::Error;
};

// Non-finite gradients or parameters encountered during optimization.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace esa
