#pragma once

#include "bruf/belief.hpp"
#include "bruf/model.hpp"

namespace bruf {

/// Planar range-only observation of a point with a correlated Gaussian prior.
struct RangeScenario {
    GaussianBelief prior{Vector{{-3.0, 0.0}}, Matrix{{1.0, 0.5}, {0.5, 1.0}}};
    double noise_var = 0.01;
    double observed = 1.0;

    Vector measurement() const { return Vector::Constant(1, observed); }
};

/// h(x) = |x| with Jacobian xᵀ/|x|; the Jacobian throws SingularPointError at the origin.
MeasurementModel range_model(double noise_var = 0.01);

}  // namespace bruf
