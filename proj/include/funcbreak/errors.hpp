#pragma once

#include <stdexcept>
#include <string>

namespace funcbreak {

/// Malformed or insufficient input data (parse failures, too few points, bad ranges).
class DataError : public std::invalid_argument {
public:
    explicit DataError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation that is well-posed in exact arithmetic hit a degenerate case
/// (zero break function, rank-deficient covariance, non-finite entries).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// The quadratic-form variance along the break direction came out above the top long-run eigenvalue.
class BoundViolation : public NumericalError {
public:
    explicit BoundViolation(const std::string& what) : NumericalError(what) {}
};

}  // namespace funcbreak
