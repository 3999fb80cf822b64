#pragma once

#include "bruf/ensemble_update.hpp"
#include "bruf/grid_oracle.hpp"
#include "bruf/harness/config.hpp"
#include "bruf/harness/output.hpp"
#include "bruf/models/range.hpp"
#include "bruf/recursive_update.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bruf::harness {

struct RangeDemoSettings {
    RangeScenario scenario;
    std::uint64_t seed = 1;
    std::size_t steps = 25;
    std::vector<std::size_t> convergence_steps{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 25};
    double ec_tol = 0.1;
    std::size_t ec_initial_steps = 25;
    Eigen::Index members = 200;
    std::size_t ensemble_steps = 25;
    double ensemble_ec_tol = 1e-6;
    double ensemble_inflation = 1.0;
    std::vector<std::size_t> snapshot_steps{1, 5, 10, 25};
    GridBounds bounds;
    Eigen::Index grid_resolution = 800;
    Eigen::Index export_resolution = 200;
    double ring_band = 0.3;
    double hdr_mass = 0.99;
};

RangeDemoSettings range_settings(const Config& config);

struct RangeFilterRun {
    std::string name;
    GaussianBelief posterior;
    UpdateTrace trace;
    double distance_to_map = 0.0;
};

struct ConvergenceRow {
    std::string method;
    std::size_t steps = 0;
    Vector mean;
    double distance_to_map = 0.0;
    double sigma1 = 0.0;
    Eigen::Vector2d sigma2e2 = Eigen::Vector2d::Zero();
    /// |σ₂e₂ - σ̂₂ê₂| against the oracle covariance, sign of ê₂ aligned to e₂.
    double sigma2e2_difference = 0.0;
};

struct RangeEnsembleRun {
    std::string name;
    Ensemble final_ensemble;
    EnsembleTrace trace;
    double ring_fraction = 0.0;
    double hdr_fraction = 0.0;
};

struct RangeDemoResult {
    GridPosterior grid;
    Vector map;
    Vector oracle_mean;
    Matrix oracle_cov;
    std::vector<RangeFilterRun> filters;
    std::vector<ConvergenceRow> convergence;
    Ensemble prior_ensemble;
    std::vector<RangeEnsembleRun> ensembles;
    /// J along the plain IEKF iterates, prior first.
    std::vector<double> iekf_plain_objective;
};

RangeDemoResult run_range_demo(const RangeDemoSettings& settings);
void write_range_demo(const RangeDemoResult& result, const RangeDemoSettings& settings, OutputDir& out);

/// (σ₁, σ₂e₂) of a 2×2 covariance, σ = sqrt(eigenvalue), e₂ the minor axis.
std::pair<double, Eigen::Vector2d> covariance_axes(const Matrix& cov, const Eigen::Vector2d& reference_minor);

}  // namespace bruf::harness
