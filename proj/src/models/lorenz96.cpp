#include "bruf/models/lorenz96.hpp"

#include "bruf/errors.hpp"

#include <cmath>
#include <string>

namespace bruf {

std::vector<Eigen::Index> Lorenz96Scenario::observed() const {
    if (!obs_indices.empty()) return obs_indices;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 1; i < n; i += 2) idx.push_back(i);
    return idx;
}

Vector lorenz96_derivative(const Vector& x, double forcing) {
    const Eigen::Index n = x.size();
    if (n < 4) throw DimensionError("lorenz96: need at least 4 components");
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xp1 = x((i + 1) % n);
        const double xm1 = x((i + n - 1) % n);
        const double xm2 = x((i + n - 2) % n);
        d(i) = (xp1 - xm2) * xm1 - x(i) + forcing;
    }
    return d;
}

Matrix lorenz96_jacobian(const Vector& x) {
    const Eigen::Index n = x.size();
    if (n < 4) throw DimensionError("lorenz96: need at least 4 components");
    Matrix j = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index ip1 = (i + 1) % n, im1 = (i + n - 1) % n, im2 = (i + n - 2) % n;
        j(i, ip1) += x(im1);
        j(i, im2) -= x(im1);
        j(i, im1) += x(ip1) - x(im2);
        j(i, i) -= 1.0;
    }
    return j;
}

namespace {

void check_finite(const Vector& x, std::size_t substep) {
    if (!x.allFinite()) throw DivergenceError(substep, "rk4: non-finite state at substep " + std::to_string(substep));
}

}  // namespace

Vector rk4_propagate(const Vector& x, double dt, std::size_t substeps, const Derivative& deriv) {
    if (substeps == 0) throw InvalidArgumentError("rk4: substeps must be >= 1");
    const double h = dt / static_cast<double>(substeps);
    Vector s = x;
    for (std::size_t k = 0; k < substeps; ++k) {
        const Vector k1 = deriv(s);
        const Vector k2 = deriv(s + 0.5 * h * k1);
        const Vector k3 = deriv(s + 0.5 * h * k2);
        const Vector k4 = deriv(s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(s, k);
    }
    return s;
}

std::pair<Vector, Matrix> rk4_propagate_linearized(const Vector& x, double dt, std::size_t substeps,
                                                   const Derivative& deriv, const DerivativeJacobian& jacobian) {
    if (substeps == 0) throw InvalidArgumentError("rk4: substeps must be >= 1");
    const double h = dt / static_cast<double>(substeps);
    const Eigen::Index n = x.size();
    const Matrix eye = Matrix::Identity(n, n);
    Vector s = x;
    Matrix phi = eye;
    for (std::size_t k = 0; k < substeps; ++k) {
        const Vector a2 = s;
        const Vector k1 = deriv(a2);
        const Matrix d1 = jacobian(a2);
        const Vector a3 = s + 0.5 * h * k1;
        const Vector k2 = deriv(a3);
        const Matrix d2 = jacobian(a3) * (eye + 0.5 * h * d1);
        const Vector a4 = s + 0.5 * h * k2;
        const Vector k3 = deriv(a4);
        const Matrix d3 = jacobian(a4) * (eye + 0.5 * h * d2);
        const Vector k4 = deriv(s + h * k3);
        const Matrix d4 = jacobian(s + h * k3) * (eye + h * d3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const Matrix step = eye + (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        phi = step * phi;
        check_finite(s, k);
    }
    return {s, phi};
}

MeasurementModel l96_measurement_model(const Lorenz96Scenario& scenario) {
    if (!(scenario.gamma >= 1.0)) throw InvalidArgumentError("l96 measurement: gamma must be >= 1");
    if (!(scenario.meas_scale > 0.0)) throw InvalidArgumentError("l96 measurement: scale must be positive");
    const std::vector<Eigen::Index> idx = scenario.observed();
    const Eigen::Index n = scenario.n;
    for (Eigen::Index i : idx) {
        if (i < 0 || i >= n) throw DimensionError("l96 measurement: observed index out of range");
    }
    const double f = scenario.meas_scale;
    const double g = scenario.gamma;
    const auto m = static_cast<Eigen::Index>(idx.size());

    MeasurementModel model;
    model.h = [idx, n, f, g, m](const Vector& x) {
        if (x.size() != n) throw DimensionError("l96 measurement: state size mismatch");
        Vector y(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double v = x(idx[k]);
            y(k) = 0.5 * v * (1.0 + std::pow(std::abs(v) / f, g - 1.0));
        }
        return y;
    };
    model.jacobian = [idx, n, f, g, m](const Vector& x) {
        if (x.size() != n) throw DimensionError("l96 measurement: state size mismatch");
        Matrix j = Matrix::Zero(m, n);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double v = x(idx[k]);
            j(k, idx[k]) = 0.5 * (1.0 + g * std::pow(std::abs(v) / f, g - 1.0));
        }
        return j;
    };
    model.noise_cov = scenario.noise_var * Matrix::Identity(m, m);
    return model;
}

DynamicsModel lorenz96_dynamics(const Lorenz96Scenario& scenario) {
    const double forcing = scenario.forcing;
    const double dt_obs = scenario.dt_obs;
    const auto per_obs = static_cast<double>(scenario.substeps);
    auto count = [dt_obs, per_obs](double duration) {
        const auto k = static_cast<std::size_t>(std::llround(duration / dt_obs * per_obs));
        return k == 0 ? std::size_t{1} : k;
    };
    auto deriv = [forcing](const Vector& x) { return lorenz96_derivative(x, forcing); };
    DynamicsModel model;
    model.propagate = [=](const Vector& x, double duration) { return rk4_propagate(x, duration, count(duration), deriv); };
    model.cov_propagator = [=](const Vector& x, double duration) {
        return rk4_propagate_linearized(x, duration, count(duration), deriv, lorenz96_jacobian);
    };
    return model;
}

}  // namespace bruf
