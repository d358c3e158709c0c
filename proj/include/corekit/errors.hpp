#pragma once

#include <stdexcept>
#include <string>

namespace corekit {

// Dimension or index mismatch between numeric arguments.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Semantically invalid input value (bad divisor, empty file, degenerate spec).
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed text input; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    long line_number;
};

// Operation called on an object whose required state is not yet populated.
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

// Config file / override validation failure. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Damped batch Hessian could not be factorized.
struct SingularHessianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace corekit
