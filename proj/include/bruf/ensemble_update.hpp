#pragma once

#include "bruf/belief.hpp"
#include "bruf/model.hpp"
#include "bruf/random.hpp"
#include "bruf/recursive_update.hpp"

#include <vector>

namespace bruf {

struct EnsembleUpdateConfig {
    StepSchedule schedule = StepSchedule::uniform(1);
    double inflation = 1.0;
    /// When false every γ_j is zero (deterministic member updates).
    bool perturb_observations = true;
    /// Keep a copy of the ensemble after every accepted step.
    bool keep_snapshots = false;

    void validate() const;
};

/// Pseudo-times of the accepted steps (ending at 1) and, when requested, the
/// ensemble at each of them.
struct EnsembleTrace {
    std::vector<double> times;
    std::vector<Ensemble> snapshots;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

struct EnsembleResult {
    Ensemble ensemble;
    EnsembleTrace trace;
};

/// Linearized EnKF: inflate by α, one empirical covariance, then a
/// per-member EKF update against a perturbed predicted measurement.
Ensemble enkf_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y, double inflation, Rng& rng,
                     bool perturb_observations = true);

/// Recursive ensemble update: per step inflate by α^{c_i}, recompute the
/// empirical covariance, and update every member with noise R/c_i. A uniform
/// schedule gives the BRUEnKF, a variable one the VS-BRUEnKF.
EnsembleResult bruenkf_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y,
                              const EnsembleUpdateConfig& config, Rng& rng);

struct EcEnsembleConfig {
    /// What the controller's error norm is taken over.
    enum class ErrorOn { ensemble_mean, worst_member };

    ErrorController controller;
    ErrorOn error_on = ErrorOn::ensemble_mean;
    double inflation = 1.0;
    bool perturb_observations = true;
    bool keep_snapshots = false;
};

/// Error-controlled recursive ensemble update. Each trial step is one
/// recursive step of length ds; the embedded midpoint stage relinearizes every
/// member at its trial state, and the controller acts on the ensemble mean.
EnsembleResult ec_bruenkf_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y,
                                 const EcEnsembleConfig& config, Rng& rng);

namespace detail {

/// m×M perturbations γ_j ~ N(0, R), one column per member, drawn in member order.
Matrix draw_perturbations(const Matrix& noise_lower, Eigen::Index members, Rng& rng);

/// Per-member increments K_j (y - h(x_j) - γ_j) with K_j from the shared
/// covariance and noise_scale·R.
Matrix member_increments(const Matrix& members, const Matrix& cov, const MeasurementModel& model, const Vector& y,
                         double noise_scale, const Matrix& perturbations, std::size_t step);

}  // namespace detail

}  // namespace bruf
