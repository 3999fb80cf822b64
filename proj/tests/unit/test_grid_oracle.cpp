#include "bruf/errors.hpp"
#include "bruf/grid_oracle.hpp"
#include "bruf/models/range.hpp"
#include "bruf/recursive_update.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

using namespace bruf;

namespace {

GridBounds symmetric_bounds(double half) { return {-half, half, -half, half}; }

}  // namespace

TEST(GridPosterior, ConjugateCaseMatchesKalman) {
    const GaussianBelief prior{Vector{{0.5, -0.3}}, Matrix{{1.0, 0.3}, {0.3, 0.8}}};
    const auto model = MeasurementModel::linear(Matrix::Identity(2, 2), Matrix{{0.5, 0.0}, {0.0, 0.4}});
    const Vector y{{1.0, 0.2}};
    const auto grid = grid_posterior(prior, model, y, symmetric_bounds(6.0), 400);
    const auto ref = kalman_update(prior, model, y);
    EXPECT_NEAR(grid.total_mass(), 1.0, 1e-6);
    EXPECT_LT((grid.mean() - ref.mean).norm(), 1e-3);
    EXPECT_LT((grid.covariance() - ref.cov).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT((map_of(grid) - ref.mean).cwiseAbs().maxCoeff(), std::max(grid.dx, grid.dy));
}

TEST(GridPosterior, UninformativeMeasurementKeepsPrior) {
    const GaussianBelief prior{Vector{{-1.0, 0.5}}, Matrix{{1.0, 0.5}, {0.5, 1.0}}};
    const auto model = MeasurementModel::linear(Matrix::Identity(2, 2), 1e12 * Matrix::Identity(2, 2));
    const auto grid = grid_posterior(prior, model, Vector{{3.0, 3.0}}, symmetric_bounds(7.0), 400);
    EXPECT_LT((grid.mean() - prior.mean).norm(), 1e-3);
}

TEST(GridPosterior, SymmetricDensityPeaksAtCenter) {
    const GaussianBelief prior{Vector::Zero(2), Matrix::Identity(2, 2)};
    const auto model = MeasurementModel::linear(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    const auto grid = grid_posterior(prior, model, Vector::Zero(2), symmetric_bounds(5.0), 101);
    EXPECT_LT(map_of(grid).norm(), 1e-12);
}

TEST(GridPosterior, TiesGoToLowestIndex) {
    // Two symmetric modes on x = ±1; the lower row/column wins.
    GaussianBelief prior{Vector::Zero(2), 100.0 * Matrix::Identity(2, 2)};
    MeasurementModel model;
    model.h = [](const Vector& x) { return Vector::Constant(1, x(0) * x(0)); };
    model.jacobian = [](const Vector& x) { return Matrix{{2.0 * x(0), 0.0}}; };
    model.noise_cov = Matrix::Constant(1, 1, 0.01);
    const auto grid = grid_posterior(prior, model, Vector::Ones(1), symmetric_bounds(2.0), 101);
    EXPECT_LT(map_of(grid)(0), 0.0);
}

TEST(GridPosterior, RangeScenarioSelfConverges) {
    RangeScenario s;
    const auto model = range_model(s.noise_var);
    const auto coarse = grid_posterior(s.prior, model, s.measurement(), GridBounds{}, 400);
    const auto fine = grid_posterior(s.prior, model, s.measurement(), GridBounds{}, 800);
    EXPECT_NEAR(coarse.total_mass(), 1.0, 1e-6);
    EXPECT_NEAR(fine.total_mass(), 1.0, 1e-6);
    EXPECT_LT((map_of(coarse) - map_of(fine)).norm(), 0.5 * coarse.dx);
    EXPECT_LT((coarse.mean() - fine.mean()).norm(), 1e-3);
    // The MAP sits on the near side of the unit ring.
    const Vector map = map_of(fine);
    EXPECT_NEAR(map.norm(), 1.0, 0.05);
    EXPECT_LT(map(0), 0.0);
}

TEST(GridPosterior, TinyNoiseStaysFinite) {
    RangeScenario s;
    const auto grid = grid_posterior(s.prior, range_model(1e-6), s.measurement(), GridBounds{}, 400);
    EXPECT_TRUE(grid.density.allFinite());
    EXPECT_NEAR(grid.total_mass(), 1.0, 1e-6);
}

TEST(GridPosterior, PreconditionsAndUnderflow) {
    RangeScenario s;
    const auto model = range_model(s.noise_var);
    EXPECT_THROW(grid_posterior(s.prior, model, s.measurement(), GridBounds{}, 50), InvalidArgumentError);
    MeasurementModel broken = model;
    broken.h = [](const Vector&) { return Vector::Constant(1, std::numeric_limits<double>::quiet_NaN()); };
    EXPECT_THROW(grid_posterior(s.prior, broken, s.measurement(), GridBounds{}, 100), NumericalUnderflowError);
}

TEST(HdrMask, IsotropicGaussianOneSigmaDisk) {
    // 2-D: P(r ≤ 1σ) = 1 - e^{-1/2} ≈ 0.3935.
    const GaussianBelief prior{Vector::Zero(2), Matrix::Identity(2, 2)};
    const auto model = MeasurementModel::linear(Matrix::Identity(2, 2), 1e12 * Matrix::Identity(2, 2));
    const auto grid = grid_posterior(prior, model, Vector::Zero(2), symmetric_bounds(6.0), 401);
    const auto mask = hdr_mask(grid, 1.0 - std::exp(-0.5));
    EXPECT_TRUE(mask.contains(Vector{{0.95, 0.0}}));
    EXPECT_TRUE(mask.contains(Vector{{0.0, -0.95}}));
    EXPECT_FALSE(mask.contains(Vector{{1.05, 0.0}}));
    EXPECT_FALSE(mask.contains(Vector{{0.75, 0.75}}));
}

TEST(HdrMask, NearlyAllMass) {
    const GaussianBelief prior{Vector::Zero(2), Matrix::Identity(2, 2)};
    const auto model = MeasurementModel::linear(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    const auto grid = grid_posterior(prior, model, Vector::Zero(2), symmetric_bounds(3.0), 101);
    const auto mask = hdr_mask(grid, 1.0 - 1e-12);
    EXPECT_TRUE(mask.contains(Vector{{2.9, 2.9}}));
    EXPECT_FALSE(mask.contains(Vector{{10.0, 0.0}}));
    EXPECT_THROW(hdr_mask(grid, 1.0), InvalidArgumentError);
}

TEST(GridPosterior, CsvExport) {
    const GaussianBelief prior{Vector::Zero(2), Matrix::Identity(2, 2)};
    const auto model = MeasurementModel::linear(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    const auto grid = grid_posterior(prior, model, Vector::Zero(2), symmetric_bounds(3.0), 100);
    std::ostringstream out;
    write_grid_csv(out, grid);
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("x,y,density\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 100 * 100 + 1);
}
