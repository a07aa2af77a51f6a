#pragma once

#include <stdexcept>
#include <string>

namespace snls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (mesh sizes, thresholds, recipe keys).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Field length does not match the mesh.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a formula (non-positive time step, L <= 0, empty series).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Zero or denormal pivot in a tridiagonal solve.
class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

/// Inner fixed-point iteration did not reach its tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Refinement would grow the mesh beyond the configured point cap.
class PointCapExceeded : public Error {
public:
    using Error::Error;
};

/// A regression was asked to fit data that cannot support it.
class FitRefused : public Error {
public:
    using Error::Error;
};

}  // namespace snls
