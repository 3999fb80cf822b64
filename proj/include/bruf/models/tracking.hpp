#pragma once

#include "bruf/belief.hpp"
#include "bruf/model.hpp"

namespace bruf {

/// Radar tracking of a nearly constant-velocity target. State is
/// [x, vx, y, vy, z, vz] in meters and m/s; measurements are (r, u, v).
struct TrackingScenario {
    double dt = 1.0;
    double q_tilde = 1e-4;
    double sigma_r = 2.5;
    double sigma_u = 1e-3;
    double sigma_v = 1e-3;
    Vector initial_true_state = (Vector(6) << 1.1e6, -2e3, 1.1e6, -2e3, 1.1e6, -1e3).finished();
    std::size_t duration = 300;

    Matrix transition() const;
    Matrix process_noise() const;
    Matrix measurement_noise() const;
    DynamicsModel dynamics() const;
};

MeasurementModel ruv_model(double sigma_r, double sigma_u, double sigma_v);
inline MeasurementModel ruv_model(const TrackingScenario& s) { return ruv_model(s.sigma_r, s.sigma_u, s.sigma_v); }

/// Cartesian position from (r, u, v), z taken on the positive side.
Eigen::Vector3d ruv_to_position(const Vector& ruv);
/// ∂position/∂(r, u, v).
Eigen::Matrix3d ruv_conversion_jacobian(const Vector& ruv);

/// Two-point initialization from measurements at consecutive steps; the belief
/// describes the state at the time of y2.
GaussianBelief tracking_initialize(const Vector& y1, const Vector& y2, const TrackingScenario& scenario);

}  // namespace bruf
