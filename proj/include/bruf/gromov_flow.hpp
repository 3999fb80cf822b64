#pragma once

#include "bruf/belief.hpp"
#include "bruf/model.hpp"
#include "bruf/random.hpp"

#include <optional>
#include <utility>

namespace bruf {

struct GromovConfig {
    /// Pseudo-time steps; Δ = 1/n_steps.
    std::size_t n_steps = 20;
    /// Added to the companion covariance at every propagation.
    std::optional<Matrix> companion_process_noise;
    bool resample_after_update = true;
    /// w̃ = 0 when false. Used by the linear-flow checks.
    bool diffusion = true;
    /// Move the companion mean to the particle mean after resampling.
    bool recenter_companion = false;

    void validate() const;
};

struct GromovResult {
    Ensemble ensemble;
    GaussianBelief companion;
};

/// (P⁻¹ + λHᵀR⁻¹H)⁻¹ without inverting P.
Matrix gromov_flow_cov(const Matrix& p, const Matrix& h, const Matrix& noise_cov, double lambda);

/// Drift f = -A⁻¹HᵀR⁻¹(h(x) - y) at one particle.
Vector gromov_drift(const Vector& x, const Matrix& p, const MeasurementModel& model, const Vector& y, double lambda);

/// Q(λ) = A⁻¹HᵀR⁻¹HA⁻¹.
Matrix gromov_diffusion_cov(const Matrix& p, const Matrix& h, const Matrix& noise_cov, double lambda);

/// Moves every particle along the flow with the companion prior covariance
/// held fixed, measurement-updates the companion at its own mean, then
/// optionally redraws all particles from N(particle mean, updated P).
GromovResult gromov_flow_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y,
                                const GaussianBelief& companion, const GromovConfig& config, Rng& rng);

/// EKF time update: mean through the dynamics, P ← ΦPΦᵀ + Q.
GaussianBelief companion_predict(const GaussianBelief& belief, const DynamicsModel& dynamics, double duration,
                                 const std::optional<Matrix>& extra_noise);

}  // namespace bruf
