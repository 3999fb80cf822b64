#include "bruf/models/tracking.hpp"

#include "bruf/errors.hpp"

#include <cmath>

namespace bruf {

namespace {

constexpr int kPos[3] = {0, 2, 4};
constexpr int kVel[3] = {1, 3, 5};

void check_state(const Vector& x) {
    if (x.size() != 6) throw DimensionError("tracking: state must have 6 entries");
}

}  // namespace

Matrix TrackingScenario::transition() const {
    Matrix f = Matrix::Identity(6, 6);
    for (int a = 0; a < 3; ++a) f(kPos[a], kVel[a]) = dt;
    return f;
}

Matrix TrackingScenario::process_noise() const {
    Matrix q = Matrix::Zero(6, 6);
    for (int a = 0; a < 3; ++a) {
        q(kPos[a], kPos[a]) = dt * dt * dt / 3.0;
        q(kPos[a], kVel[a]) = dt * dt / 2.0;
        q(kVel[a], kPos[a]) = dt * dt / 2.0;
        q(kVel[a], kVel[a]) = dt;
    }
    return q * q_tilde;
}

Matrix TrackingScenario::measurement_noise() const {
    return Vector{{sigma_r * sigma_r, sigma_u * sigma_u, sigma_v * sigma_v}}.asDiagonal();
}

DynamicsModel TrackingScenario::dynamics() const { return DynamicsModel::linear(transition(), process_noise()); }

MeasurementModel ruv_model(double sigma_r, double sigma_u, double sigma_v) {
    MeasurementModel model;
    model.h = [](const Vector& x) {
        check_state(x);
        const double r = std::sqrt(x(0) * x(0) + x(2) * x(2) + x(4) * x(4));
        if (r == 0.0) throw SingularPointError("ruv_model: target at the sensor");
        return Vector{{r, x(0) / r, x(2) / r}};
    };
    model.jacobian = [](const Vector& x) {
        check_state(x);
        const Eigen::Vector3d p(x(0), x(2), x(4));
        const double r = p.norm();
        if (r == 0.0) throw SingularPointError("ruv_model: target at the sensor");
        Matrix j = Matrix::Zero(3, 6);
        const double r3 = r * r * r;
        for (int a = 0; a < 3; ++a) {
            j(0, kPos[a]) = p(a) / r;
            j(1, kPos[a]) = -p(0) * p(a) / r3;
            j(2, kPos[a]) = -p(1) * p(a) / r3;
        }
        j(1, 0) += 1.0 / r;
        j(2, 2) += 1.0 / r;
        return j;
    };
    model.noise_cov = Vector{{sigma_r * sigma_r, sigma_u * sigma_u, sigma_v * sigma_v}}.asDiagonal();
    return model;
}

namespace {

double direction_w(double u, double v) {
    const double w2 = 1.0 - u * u - v * v;
    if (!(w2 > 0.0)) throw InvalidArgumentError("tracking: invalid direction cosines (u^2 + v^2 >= 1)");
    return std::sqrt(w2);
}

}  // namespace

Eigen::Vector3d ruv_to_position(const Vector& ruv) {
    if (ruv.size() != 3) throw DimensionError("ruv_to_position: expected (r, u, v)");
    const double r = ruv(0), u = ruv(1), v = ruv(2);
    return {u * r, v * r, r * direction_w(u, v)};
}

Eigen::Matrix3d ruv_conversion_jacobian(const Vector& ruv) {
    if (ruv.size() != 3) throw DimensionError("ruv_conversion_jacobian: expected (r, u, v)");
    const double r = ruv(0), u = ruv(1), v = ruv(2);
    const double w = direction_w(u, v);
    Eigen::Matrix3d j;
    j << u, r, 0.0,
         v, 0.0, r,
         w, -r * u / w, -r * v / w;
    return j;
}

GaussianBelief tracking_initialize(const Vector& y1, const Vector& y2, const TrackingScenario& scenario) {
    const Eigen::Vector3d p1 = ruv_to_position(y1);
    const Eigen::Vector3d p2 = ruv_to_position(y2);
    const Eigen::Matrix3d r = scenario.measurement_noise();
    const Eigen::Matrix3d j1 = ruv_conversion_jacobian(y1);
    const Eigen::Matrix3d j2 = ruv_conversion_jacobian(y2);
    const Eigen::Matrix3d c1 = j1 * r * j1.transpose();
    const Eigen::Matrix3d c2 = j2 * r * j2.transpose();
    const double t = scenario.dt;

    const Eigen::Vector3d vel = (p2 - p1) / t;
    const Eigen::Matrix3d vel_cov = (c1 + c2) / (t * t);
    const Eigen::Matrix3d cross = c2 / t;

    GaussianBelief belief{Vector(6), Matrix(6, 6)};
    for (int a = 0; a < 3; ++a) {
        belief.mean(kPos[a]) = p2(a);
        belief.mean(kVel[a]) = vel(a);
        for (int b = 0; b < 3; ++b) {
            belief.cov(kPos[a], kPos[b]) = c2(a, b);
            belief.cov(kVel[a], kVel[b]) = vel_cov(a, b);
            belief.cov(kPos[a], kVel[b]) = cross(a, b);
            belief.cov(kVel[b], kPos[a]) = cross(a, b);
        }
    }
    symmetrize(belief.cov);
    return belief;
}

}  // namespace bruf
