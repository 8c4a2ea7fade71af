/**
 * @file error.hpp
 * @brief Exception types shared across the library.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stonet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated on-disk artifact.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Incompatible tensor shapes or feature dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (unknown keys, out-of-range values).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Linear solver failed to reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> residual_history)
        : Error(what), history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace stonet
