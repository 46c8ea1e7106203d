#pragma once

#include <stdexcept>
#include <string>

namespace sasa {

// Engine-level failure (bad dimensions, misuse of a stream, ...).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input file does not match the expected on-disk format (WAV, score files).
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Weight/embedding container is malformed, truncated or corrupt.
struct ContainerError : Error {
    explicit ContainerError(const std::string& msg) : Error(msg) {}
};

// A hard constraint could not be satisfied (e.g. pseudo-speaker rejection
// sampling ran out of attempts).
struct ConstraintError : Error {
    explicit ConstraintError(const std::string& msg, double best = 0.0)
        : Error(msg), best_value(best) {}
    double best_value;
};

}  // namespace sasa
