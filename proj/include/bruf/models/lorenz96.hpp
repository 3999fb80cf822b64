#pragma once

#include "bruf/model.hpp"

#include <functional>
#include <vector>

namespace bruf {

struct Lorenz96Scenario {
    Eigen::Index n = 40;
    double forcing = 8.0;
    double meas_scale = 10.0;
    double gamma = 5.0;
    /// Zero-based observed components; empty means every other one starting at 1.
    std::vector<Eigen::Index> obs_indices;
    double noise_var = 1.0;
    double dt_obs = 0.05;
    std::size_t substeps = 10;

    std::vector<Eigen::Index> observed() const;
};

/// dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - x_i + F with cyclic indices.
Vector lorenz96_derivative(const Vector& x, double forcing);
Matrix lorenz96_jacobian(const Vector& x);

using Derivative = std::function<Vector(const Vector&)>;
using DerivativeJacobian = std::function<Matrix(const Vector&)>;

/// Classical RK4 with `substeps` equal steps over dt. A non-finite state
/// raises DivergenceError with the zero-based substep index.
Vector rk4_propagate(const Vector& x, double dt, std::size_t substeps, const Derivative& deriv);

/// RK4 plus the exact Jacobian of the discrete RK4 map.
std::pair<Vector, Matrix> rk4_propagate_linearized(const Vector& x, double dt, std::size_t substeps,
                                                   const Derivative& deriv, const DerivativeJacobian& jacobian);

/// h(x) = x/2 [1 + (|x|/f)^(γ-1)] on the observed components, R = noise_var·I.
MeasurementModel l96_measurement_model(const Lorenz96Scenario& scenario);

/// Propagation over a duration uses round(duration/dt_obs · substeps) RK4 steps.
DynamicsModel lorenz96_dynamics(const Lorenz96Scenario& scenario);

}  // namespace bruf
