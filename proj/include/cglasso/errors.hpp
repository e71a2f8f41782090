#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cglasso {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (non-PD matrix,
/// non-positive probability, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Caller passed inconsistent arguments (dimension mismatch, bad option).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// An iterative solver stopped before meeting its tolerance. Carries the last
/// iterate and the residual measured on it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::MatrixXd last_iterate, double residual)
        : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    const Eigen::MatrixXd& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }

private:
    Eigen::MatrixXd last_iterate_;
    double residual_;
};

}  // namespace cglasso
