#include "bruf/models/range.hpp"

#include "bruf/errors.hpp"

namespace bruf {

MeasurementModel range_model(double noise_var) {
    if (!(noise_var > 0.0)) throw InvalidArgumentError("range_model: noise variance must be positive");
    MeasurementModel model;
    model.h = [](const Vector& x) {
        if (x.size() != 2) throw DimensionError("range_model: state must be 2-D");
        return Vector::Constant(1, x.norm());
    };
    model.jacobian = [](const Vector& x) {
        if (x.size() != 2) throw DimensionError("range_model: state must be 2-D");
        const double r = x.norm();
        if (r == 0.0) throw SingularPointError("range_model: Jacobian undefined at the origin");
        return Matrix(x.transpose() / r);
    };
    model.noise_cov = Matrix::Constant(1, 1, noise_var);
    return model;
}

}  // namespace bruf
