#include "bruf/errors.hpp"
#include "bruf/models/lorenz96.hpp"
#include "bruf/models/range.hpp"
#include "bruf/models/tracking.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace bruf;

namespace {

Vector shift(const Vector& x, Eigen::Index k) {
    const Eigen::Index n = x.size();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out((i + k) % n) = x(i);
    return out;
}

Vector tracking_state(const Eigen::Vector3d& p, const Eigen::Vector3d& v) {
    return Vector{{p(0), v(0), p(1), v(1), p(2), v(2)}};
}

}  // namespace

TEST(RangeModel, ThreeFourFive) {
    const auto model = range_model();
    EXPECT_DOUBLE_EQ(model.h(Vector{{3.0, 4.0}})(0), 5.0);
    const Matrix j = model.jacobian(Vector{{3.0, 4.0}});
    EXPECT_DOUBLE_EQ(j(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(j(0, 1), 0.8);
    EXPECT_DOUBLE_EQ(model.noise_cov(0, 0), 0.01);
}

TEST(RangeModel, JacobianMatchesFiniteDifferences) {
    const auto model = range_model();
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        Vector x = 3.0 * rng.standard_normal(2);
        if (x.norm() < 1e-3) x(0) += 1.0;
        EXPECT_LT(jacobian_fd_error(model, x), 1e-6);
    }
}

TEST(RangeModel, OriginIsSingular) {
    EXPECT_THROW(range_model().jacobian(Vector::Zero(2)), SingularPointError);
}

TEST(TrackingScenario, TransitionAndNoiseBlocks) {
    TrackingScenario s;
    s.dt = 2.0;
    s.q_tilde = 3.0;
    const Matrix f = s.transition();
    const Matrix q = s.process_noise();
    for (int a = 0; a < 3; ++a) {
        const int p = 2 * a;
        const int v = 2 * a + 1;
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                double fe = i == j ? 1.0 : 0.0;
                if (i == p && j == v) fe = 2.0;
                if (i == p || i == v) EXPECT_EQ(f(i, j), fe) << i << "," << j;
            }
        }
        EXPECT_DOUBLE_EQ(q(p, p), 3.0 * 8.0 / 3.0);
        EXPECT_DOUBLE_EQ(q(p, v), 3.0 * 4.0 / 2.0);
        EXPECT_DOUBLE_EQ(q(v, p), 3.0 * 4.0 / 2.0);
        EXPECT_DOUBLE_EQ(q(v, v), 3.0 * 2.0);
    }
    // No coupling between axes.
    EXPECT_EQ(q(0, 2), 0.0);
    EXPECT_EQ(q(1, 5), 0.0);
    EXPECT_EQ(s.measurement_noise(), Matrix(Vector{{6.25, 1e-6, 1e-6}}.asDiagonal()));
}

TEST(RuvModel, AxisAndDiagonal) {
    TrackingScenario s;
    const auto model = ruv_model(s);
    const Vector axis = model.h(tracking_state({1.0, 0.0, 0.0}, Eigen::Vector3d::Zero()));
    EXPECT_DOUBLE_EQ(axis(0), 1.0);
    EXPECT_DOUBLE_EQ(axis(1), 1.0);
    EXPECT_DOUBLE_EQ(axis(2), 0.0);
    const Vector diag = model.h(tracking_state(Eigen::Vector3d::Constant(1100.0), Eigen::Vector3d::Zero()));
    EXPECT_NEAR(diag(0), 1100.0 * std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(diag(1), 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(diag(2), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(RuvModel, JacobianMatchesFiniteDifferences) {
    const auto model = ruv_model(TrackingScenario{});
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        Vector x = tracking_state(Eigen::Vector3d(1e6, 1e6, 1e6) + 3e5 * Eigen::Vector3d(rng.standard_normal(3)),
                                  Eigen::Vector3d(rng.standard_normal(3)) * 1e3);
        const Matrix j = model.jacobian(x);
        EXPECT_EQ(j.col(1).norm() + j.col(3).norm() + j.col(5).norm(), 0.0);
        EXPECT_LT(jacobian_fd_error(model, x), 1e-6);
    }
    EXPECT_THROW(model.jacobian(Vector::Zero(6)), SingularPointError);
}

TEST(TrackingInitialize, ZAxisConversionCovariance) {
    const double r = 5000.0;
    const Eigen::Matrix3d j = ruv_conversion_jacobian(Vector{{r, 0.0, 0.0}});
    TrackingScenario s;
    const Eigen::Matrix3d c = j * s.measurement_noise() * j.transpose();
    EXPECT_NEAR(c(0, 0), r * r * 1e-6, 1e-12);
    EXPECT_NEAR(c(1, 1), r * r * 1e-6, 1e-12);
    EXPECT_NEAR(c(2, 2), 6.25, 1e-12);
    EXPECT_NEAR(c(0, 1), 0.0, 1e-12);
}

TEST(TrackingInitialize, NoiselessRoundTrip) {
    TrackingScenario s;
    const auto model = ruv_model(s);
    const Matrix f = s.transition();
    const Vector x1 = s.initial_true_state;
    const Vector x2 = f * x1;
    const auto belief = tracking_initialize(model.h(x1), model.h(x2), s);
    EXPECT_LT((belief.mean - x2).norm() / x2.norm(), 1e-9);
    // Velocity is exact up to conversion round-off.
    EXPECT_NEAR(belief.mean(1), x2(1), 1e-6);
    EXPECT_TRUE(is_valid_covariance(belief.cov));
}

TEST(TrackingInitialize, CovarianceBlocks) {
    TrackingScenario s;
    s.dt = 2.0;
    const auto model = ruv_model(s);
    const Vector y1 = model.h(s.initial_true_state);
    const Vector y2 = model.h(s.transition() * s.initial_true_state);
    const auto b = tracking_initialize(y1, y2, s);
    const Eigen::Matrix3d j1 = ruv_conversion_jacobian(y1);
    const Eigen::Matrix3d j2 = ruv_conversion_jacobian(y2);
    const Eigen::Matrix3d c1 = j1 * s.measurement_noise() * j1.transpose();
    const Eigen::Matrix3d c2 = j2 * s.measurement_noise() * j2.transpose();
    for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(b.cov(2 * a, 2 * c), c2(a, c), 1e-9 * c2.norm());
            EXPECT_NEAR(b.cov(2 * a + 1, 2 * c + 1), (c1(a, c) + c2(a, c)) / 4.0, 1e-9 * c2.norm());
            EXPECT_NEAR(b.cov(2 * a, 2 * c + 1), c2(a, c) / 2.0, 1e-9 * c2.norm());
        }
    }
}

TEST(TrackingInitialize, MonteCarloConversionCovariance) {
    TrackingScenario s;
    const auto model = ruv_model(s);
    const Vector y_true = model.h(s.initial_true_state);
    const Eigen::Matrix3d j = ruv_conversion_jacobian(y_true);
    const Eigen::Matrix3d expected = j * s.measurement_noise() * j.transpose();
    const Vector sd = s.measurement_noise().diagonal().cwiseSqrt();
    Rng rng(3);
    constexpr int count = 100000;
    Eigen::Matrix<double, 3, Eigen::Dynamic> pts(3, count);
    for (int i = 0; i < count; ++i) pts.col(i) = ruv_to_position(y_true + sd.cwiseProduct(rng.standard_normal(3)));
    const Eigen::Vector3d mean = pts.rowwise().mean();
    const Eigen::Matrix3d dev_cov = (pts.colwise() - mean) * (pts.colwise() - mean).transpose() / (count - 1.0);
    // Off-diagonal entries are judged against the matching standard deviations.
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const double scale = std::sqrt(expected(a, a) * expected(b, b));
            EXPECT_NEAR(dev_cov(a, b), expected(a, b), 0.05 * (a == b ? expected(a, a) : scale)) << a << "," << b;
        }
    }
}

TEST(TrackingInitialize, RejectsInvalidCosines) {
    TrackingScenario s;
    const Vector bad{{1000.0, 0.8, 0.7}};
    const Vector good{{1000.0, 0.1, 0.1}};
    EXPECT_THROW(tracking_initialize(bad, good, s), InvalidArgumentError);
}

TEST(Lorenz96, FixedPointAndOrigin) {
    EXPECT_LT(lorenz96_derivative(Vector::Constant(40, 8.0), 8.0).norm(), 1e-15);
    EXPECT_EQ(lorenz96_derivative(Vector::Zero(40), 8.0), Vector::Constant(40, 8.0));
    EXPECT_THROW(lorenz96_derivative(Vector::Zero(3), 8.0), DimensionError);
}

TEST(Lorenz96, ShiftEquivariance) {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const Vector x = 4.0 * rng.standard_normal(40);
        const Eigen::Index k = 1 + i % 39;
        EXPECT_LT((lorenz96_derivative(shift(x, k), 8.0) - shift(lorenz96_derivative(x, 8.0), k)).norm(), 1e-12);
    }
}

TEST(Lorenz96, JacobianMatchesFiniteDifferences) {
    Rng rng(5);
    const Vector x = 3.0 * rng.standard_normal(40);
    const Matrix fd = finite_difference_jacobian([](const Vector& z) { return lorenz96_derivative(z, 8.0); }, x);
    EXPECT_LT((lorenz96_jacobian(x) - fd).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Rk4, ZeroDerivative) {
    const Vector x{{1.0, -2.0}};
    EXPECT_EQ(rk4_propagate(x, 3.0, 7, [](const Vector& z) { return Vector(Vector::Zero(z.size())); }), x);
}

TEST(Rk4, Exponential) {
    const Vector out = rk4_propagate(Vector::Ones(1), 1.0, 10, [](const Vector& z) { return z; });
    EXPECT_NEAR(out(0), std::exp(1.0), 1e-5);
}

TEST(Rk4, FourthOrderOnLorenz96) {
    Rng rng(6);
    const Vector x = Vector::Constant(40, 8.0) + 2.0 * rng.standard_normal(40);
    const auto deriv = [](const Vector& z) { return lorenz96_derivative(z, 8.0); };
    const Vector ref = rk4_propagate(x, 0.2, 1000, deriv);
    const double e1 = (rk4_propagate(x, 0.2, 4, deriv) - ref).norm();
    const double e2 = (rk4_propagate(x, 0.2, 8, deriv) - ref).norm();
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e1 / e2, 20.0);
}

TEST(Rk4, LinearizationIsExactJacobianOfTheMap) {
    Rng rng(7);
    const Vector x = Vector::Constant(40, 8.0) + rng.standard_normal(40);
    const auto deriv = [](const Vector& z) { return lorenz96_derivative(z, 8.0); };
    const auto [state, phi] = rk4_propagate_linearized(x, 0.05, 10, deriv, lorenz96_jacobian);
    EXPECT_EQ(state, rk4_propagate(x, 0.05, 10, deriv));
    const Matrix fd = finite_difference_jacobian([&](const Vector& z) { return rk4_propagate(z, 0.05, 10, deriv); }, x);
    EXPECT_LT((phi - fd).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Rk4, DivergenceReportsSubstep) {
    int calls = 0;
    const auto deriv = [&calls](const Vector& z) {
        // Four evaluations per substep; blow up during the third substep.
        return ++calls > 8 ? Vector(Vector::Constant(z.size(), std::numeric_limits<double>::infinity()))
                           : Vector(Vector::Zero(z.size()));
    };
    try {
        rk4_propagate(Vector::Zero(2), 1.0, 5, deriv);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.substep(), 2u);
    }
}

TEST(L96Measurement, LinearAtGammaOne) {
    Lorenz96Scenario s;
    s.gamma = 1.0;
    const auto model = l96_measurement_model(s);
    Rng rng(8);
    const Vector x = 5.0 * rng.standard_normal(40);
    const Vector y = model.h(x);
    ASSERT_EQ(y.size(), 20);
    for (Eigen::Index i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(y(i), x(2 * i + 1));
    EXPECT_EQ(model.noise_cov, Matrix::Identity(20, 20));
}

TEST(L96Measurement, UnitRatio) {
    Lorenz96Scenario s;
    const auto model = l96_measurement_model(s);
    Vector x = Vector::Zero(40);
    x(1) = 10.0;
    x(3) = -10.0;
    EXPECT_DOUBLE_EQ(model.h(x)(0), 10.0);
    EXPECT_DOUBLE_EQ(model.h(x)(1), -10.0);
    EXPECT_DOUBLE_EQ(model.jacobian(Vector::Zero(40))(0, 1), 0.5);
}

TEST(L96Measurement, JacobianMatchesFiniteDifferences) {
    Rng rng(9);
    for (double gamma : {1.0, 3.0, 5.0, 9.0}) {
        Lorenz96Scenario s;
        s.gamma = gamma;
        const auto model = l96_measurement_model(s);
        for (int i = 0; i < 100; ++i) {
            Vector x = 6.0 * rng.standard_normal(40);
            for (Eigen::Index k = 0; k < 40; ++k)
                if (std::abs(x(k)) < 1e-3) x(k) = 1e-3;
            EXPECT_LT(jacobian_fd_error(model, x), 1e-5);
        }
    }
}

TEST(L96Measurement, ShiftEquivariance) {
    Lorenz96Scenario s;
    Lorenz96Scenario shifted = s;
    shifted.obs_indices.clear();
    for (auto i : s.observed()) shifted.obs_indices.push_back((i + 2) % 40);
    Rng rng(10);
    const Vector x = 4.0 * rng.standard_normal(40);
    EXPECT_EQ(l96_measurement_model(shifted).h(shift(x, 2)), l96_measurement_model(s).h(x));
}

TEST(Lorenz96Dynamics, ObservationIntervalUsesSubsteps) {
    Lorenz96Scenario s;
    const auto dyn = lorenz96_dynamics(s);
    Rng rng(11);
    const Vector x = Vector::Constant(40, 8.0) + rng.standard_normal(40);
    const auto deriv = [](const Vector& z) { return lorenz96_derivative(z, 8.0); };
    EXPECT_EQ(dyn.propagate(x, 0.05), rk4_propagate(x, 0.05, 10, deriv));
    const auto [mean, phi] = dyn.cov_propagator(x, 0.05);
    EXPECT_EQ(mean, rk4_propagate(x, 0.05, 10, deriv));
    EXPECT_EQ(phi.rows(), 40);
}

TEST(Lorenz96Dynamics, AcceptsLargeStates) {
    // The interfaces carry no fixed dimension.
    Lorenz96Scenario s;
    s.n = 2048;
    const auto dyn = lorenz96_dynamics(s);
    const Vector x = Vector::Constant(2048, 8.0);
    EXPECT_LT((dyn.propagate(x, 0.05) - x).norm(), 1e-12);
    EXPECT_EQ(l96_measurement_model(s).h(x).size(), 1024);
}
