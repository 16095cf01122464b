#pragma once

#include <stdexcept>
#include <string>

namespace proco {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand dimensions disagree (matmul inner dims, elementwise shape, ...).
struct ShapeError : Error {
    using Error::Error;
};

// Input is outside the mathematical domain of the operation (log of a
// non-positive value, calibration factor <= 0, ...).
struct DomainError : Error {
    using Error::Error;
};

// Structurally valid input that the operation cannot act on, e.g. a
// zero vector handed to a normalizer.
struct DegenerateInputError : Error {
    using Error::Error;
};

// Configuration violates a precondition (bad hyperparameter, bad flag).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed external data (CSV rows, config files). Messages carry the
// offending line number where one exists.
struct ParseError : Error {
    using Error::Error;
};

// A runtime invariant was broken (non-unit queue feature, non-finite
// gradient, ...).
struct InvariantError : Error {
    using Error::Error;
};

// Filesystem-level failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace proco
