#include "bruf/model.hpp"

#include "bruf/errors.hpp"

#include <algorithm>

namespace bruf {

MeasurementModel MeasurementModel::with_numeric_jacobian(Map h, Matrix noise_cov) {
    MeasurementModel model;
    model.jacobian = [h](const Vector& x) { return finite_difference_jacobian(h, x); };
    model.h = std::move(h);
    model.noise_cov = std::move(noise_cov);
    return model;
}

MeasurementModel MeasurementModel::linear(const Matrix& h, Matrix noise_cov) {
    if (h.rows() != noise_cov.rows()) throw DimensionError("linear model: H and R disagree on measurement size");
    MeasurementModel model;
    model.h = [h](const Vector& x) -> Vector { return h * x; };
    model.jacobian = [h](const Vector&) -> Matrix { return h; };
    model.noise_cov = std::move(noise_cov);
    return model;
}

void MeasurementModel::validate() const {
    if (!h || !jacobian) throw InvalidArgumentError("measurement model: missing h or jacobian");
    if (noise_cov.rows() != noise_cov.cols()) throw DimensionError("measurement model: R must be square");
    if (asymmetry(noise_cov) > 1e-12 * noise_cov.cwiseAbs().maxCoeff()) {
        throw NotPsdError("measurement model: R is not symmetric");
    }
    SpdFactor check(noise_cov);
}

double jacobian_fd_error(const MeasurementModel& model, const Vector& x) {
    const Matrix analytic = model.jacobian(x);
    const Matrix numeric = finite_difference_jacobian(model.h, x);
    const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
    return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

DynamicsModel DynamicsModel::linear(const Matrix& f, std::optional<Matrix> q) {
    DynamicsModel model;
    model.propagate = [f](const Vector& x, double) -> Vector { return f * x; };
    model.cov_propagator = [f](const Vector& x, double) { return std::pair<Vector, Matrix>{f * x, f}; };
    model.process_noise_cov = std::move(q);
    return model;
}

}  // namespace bruf
