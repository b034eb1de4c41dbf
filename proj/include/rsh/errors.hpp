#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rsh {

// Error taxonomy. The C API maps these onto the exit-code classes
// (config = 1, numeric = 2, partial sweep = 3).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, unknown keys, invalid parameter ranges.
struct ConfigError : Error {
    using Error::Error;
};

// Operand dimensions do not match the declared spaces.
struct ShapeError : Error {
    using Error::Error;
};

// A component index is outside its factor dimension.
struct RangeError : Error {
    using Error::Error;
};

// Requested total dimension exceeds the configured cap.
struct ResourceError : Error {
    using Error::Error;
};

// System Hamiltonian has a near-degenerate spectrum (gap below threshold).
struct DegeneracyError : Error {
    using Error::Error;
};

// Eigensolver failure, non-Hermitian input where Hermitian is required, etc.
struct NumericError : Error {
    using Error::Error;
};

// Fixed-point iteration failed to reach the residual tolerance.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, std::vector<double> residuals)
        : Error(msg), residual_trace(std::move(residuals)) {}
    std::vector<double> residual_trace;
};

// An energy window selected no eigenstates.
struct EmptyWindowError : Error {
    using Error::Error;
};

// fit_beta target energy lies outside the open spectral range of h_eff.
struct UnfittableError : Error {
    using Error::Error;
};

// Operation requires a factorized interaction sum_l J^S_l x J^A_l.
struct UnsupportedFormError : Error {
    using Error::Error;
};

}  // namespace rsh
