#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bruf {

/// Base class of every error raised by the estimation library.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class InsufficientSamplesError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class InvalidArgumentError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

/// Where in a recursive or ensemble update a factorization failed.
struct FailureSite {
    std::optional<std::size_t> step = std::nullopt;
    std::optional<std::size_t> member = std::nullopt;
    std::optional<double> lambda = std::nullopt;

    std::string describe() const;
};

/// A triangular factorization hit a non-positive pivot.
class NotPositiveDefiniteError : public EstimationError {
public:
    NotPositiveDefiniteError(std::size_t pivot, FailureSite site = {});

    std::size_t pivot() const noexcept { return pivot_; }
    const FailureSite& site() const noexcept { return site_; }

    /// Same error, annotated with the position of the failing update.
    NotPositiveDefiniteError at(FailureSite site) const;

private:
    std::size_t pivot_;
    FailureSite site_;
};

class NotPsdError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class NotInvertibleError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

/// Measurement model evaluated where it is not differentiable (range zero).
class SingularPointError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class DivergenceError : public EstimationError {
public:
    DivergenceError(std::size_t substep, const std::string& what);
    std::size_t substep() const noexcept { return substep_; }

private:
    std::size_t substep_;
};

class StalledControllerError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class NoDescentError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class NumericalUnderflowError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

}  // namespace bruf
