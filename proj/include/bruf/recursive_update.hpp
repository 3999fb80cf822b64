#pragma once

#include "bruf/belief.hpp"
#include "bruf/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bruf {

/// Pseudo-time weights c_1..c_N of a recursive update. Step i uses measurement
/// covariance R/c_i; the weights must sum to one for the recursion to collapse
/// to a single Kalman update when h is linear.
class StepSchedule {
public:
    enum class Kind { uniform, variable, custom };

    /// c_i = 1/N, noise scale exactly N.
    static StepSchedule uniform(std::size_t steps);
    /// c_i = i / (N(N+1)/2), noise scale exactly (N(N+1)/2)/i.
    static StepSchedule variable(std::size_t steps);
    /// Arbitrary positive weights; must sum to 1 within 1e-12.
    static StepSchedule custom(std::vector<double> coefficients);
    /// Skips the sum-to-one check. Used for negative controls only.
    static StepSchedule unchecked(std::vector<double> coefficients);

    Kind kind() const noexcept { return kind_; }
    std::size_t steps() const noexcept { return coefficients_.size(); }
    std::span<const double> coefficients() const noexcept { return coefficients_; }
    double coefficient(std::size_t i) const { return coefficients_.at(i); }
    /// Factor applied to R at zero-based step i (1/c_i).
    double noise_scale(std::size_t i) const { return noise_scales_.at(i); }

private:
    StepSchedule(Kind kind, std::vector<double> coefficients, std::vector<double> noise_scales);

    Kind kind_;
    std::vector<double> coefficients_;
    std::vector<double> noise_scales_;
};

/// Step-size controller of the error-controlled update. Defaults are the
/// factors used for the Lorenz '96 runs: f = √0.38, f_min = 0.2, f_max = 6.
struct ErrorController {
    double atol = 1e-3;
    double rtol = 1e-3;
    double safety = 0.6164414002968976;  // sqrt(0.38)
    double min_factor = 0.2;
    double max_factor = 6.0;
    std::size_t initial_steps = 25;
    std::size_t max_rejections = 50;

    void validate() const;

    /// ds multiplier after a rejected trial: min(0.9, max(f_min, f·√(1/err))).
    double shrink_factor(double err) const;
    /// ds multiplier after an accepted trial: min(f_max, max(f_min, f·√(1/err))).
    /// err = 0 is treated as an infinite proposal, so growth is capped by f_max.
    double growth_factor(double err) const;
    /// RMS of (a - b) ∘ 1/s with s = atol + max(|a|, |b|)·rtol.
    double error_norm(const Vector& a, const Vector& b) const;
};

struct TraceIterate {
    double t = 0.0;
    Vector state;
    Matrix cov;
};

/// Accepted iterates of one measurement update, prior excluded.
struct UpdateTrace {
    std::vector<TraceIterate> iterates;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

struct UpdateOptions {
    /// (I-KH)P(I-KH)ᵀ + K(sR)Kᵀ instead of (I-KH)P.
    bool joseph_form = false;
    bool record_trace = true;
};

struct RecursiveResult {
    GaussianBelief posterior;
    UpdateTrace trace;
};

/// One EKF step linearized at `x` with measurement covariance scale·R.
struct LinearizedStep {
    Vector delta;  ///< K (y - h(x))
    Matrix gain;
    Matrix jacobian;
    Matrix cov;  ///< updated covariance, symmetrized
};

LinearizedStep linearized_step(const Vector& x, const Matrix& cov, const MeasurementModel& model, const Vector& y,
                               double noise_scale, bool joseph_form = false);

/// EKF update (exact Kalman update for linear h).
GaussianBelief kalman_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                             const UpdateOptions& options = {});

/// Information-form update linearized at the prior mean:
/// P̂⁻¹ = P̄⁻¹ + HᵀR⁻¹H and ẑ = z̄ + HᵀR⁻¹(y - h(x̄) + Hx̄).
GaussianBelief information_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y);

/// Recursive update over a fixed schedule. Uniform schedules give the BRUF,
/// variable ones the VS-BRUF.
RecursiveResult bruf_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                            const StepSchedule& schedule, const UpdateOptions& options = {});

/// Recursive update with an embedded explicit-midpoint error estimate choosing
/// the pseudo-time step.
RecursiveResult ec_bruf_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                               const ErrorController& controller, const UpdateOptions& options = {});

struct IekfOptions {
    std::size_t max_iters = 25;
    double tol = 1e-9;
    bool line_search = false;
};

/// J(x) = (x-x̄)ᵀP̄⁻¹(x-x̄) + (y-h(x))ᵀR⁻¹(y-h(x)).
double map_objective(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y, const Vector& x);

/// Gauss-Newton iterated EKF with optional halving line search.
RecursiveResult iekf_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                            const IekfOptions& options, const UpdateOptions& update_options = {});

}  // namespace bruf
