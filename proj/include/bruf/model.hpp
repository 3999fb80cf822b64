#pragma once

#include "bruf/linalg.hpp"

#include <functional>
#include <optional>

namespace bruf {

/// y = h(x) + η, η ~ N(0, R).
struct MeasurementModel {
    using Map = std::function<Vector(const Vector&)>;
    using JacobianMap = std::function<Matrix(const Vector&)>;

    Map h;
    JacobianMap jacobian;
    Matrix noise_cov;

    Eigen::Index measurement_dim() const noexcept { return noise_cov.rows(); }

    /// Model whose Jacobian comes from central differences of h.
    static MeasurementModel with_numeric_jacobian(Map h, Matrix noise_cov);

    /// Linear model y = H x + η.
    static MeasurementModel linear(const Matrix& h, Matrix noise_cov);

    /// Throws when R is not symmetric positive definite.
    void validate() const;
};

/// Largest relative deviation between model.jacobian(x) and central
/// differences of model.h at x, scaled by max(1, |J|∞).
double jacobian_fd_error(const MeasurementModel& model, const Vector& x);

/// State transition over a duration, with optional process noise and a
/// linearized propagator for covariance-carrying filters.
struct DynamicsModel {
    using Propagate = std::function<Vector(const Vector&, double)>;
    /// Returns the propagated state and the transition Jacobian Φ.
    using Linearized = std::function<std::pair<Vector, Matrix>(const Vector&, double)>;

    Propagate propagate;
    std::optional<Matrix> process_noise_cov;
    Linearized cov_propagator;

    static DynamicsModel linear(const Matrix& f, std::optional<Matrix> q);
};

}  // namespace bruf
