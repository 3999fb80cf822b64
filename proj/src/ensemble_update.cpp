#include "bruf/ensemble_update.hpp"

#include "bruf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bruf {

void EnsembleUpdateConfig::validate() const {
    if (!(inflation >= 1.0)) throw InvalidArgumentError("ensemble update: inflation must be >= 1");
    if (schedule.steps() == 0) throw InvalidArgumentError("ensemble update: empty schedule");
}

namespace detail {

Matrix draw_perturbations(const Matrix& noise_lower, Eigen::Index members, Rng& rng) {
    return noise_lower * rng.standard_normal(noise_lower.rows(), members);
}

Matrix member_increments(const Matrix& members, const Matrix& cov, const MeasurementModel& model, const Vector& y,
                         double noise_scale, const Matrix& perturbations, std::size_t step) {
    const Eigen::Index count = members.cols();
    Matrix increments(members.rows(), count);
    const Matrix scaled_noise = noise_scale * model.noise_cov;
    for (Eigen::Index j = 0; j < count; ++j) {
        const Vector x = members.col(j);
        const Matrix h = model.jacobian(x);
        const Matrix pht = cov * h.transpose();
        const Matrix s = h * pht + scaled_noise;
        const Vector innovation = y - (model.h(x) + perturbations.col(j));
        try {
            increments.col(j) = pht * SpdFactor(s).solve(innovation);
        } catch (const NotPositiveDefiniteError& e) {
            throw e.at({.step = step, .member = static_cast<std::size_t>(j)});
        }
    }
    return increments;
}

}  // namespace detail

namespace {

// Only factor R when perturbations are drawn; an empty factor keeps the row count.
Matrix noise_factor(const MeasurementModel& model, bool perturb) {
    if (!perturb) return Matrix(model.noise_cov.rows(), 0);
    return SpdFactor(model.noise_cov).lower();
}

Matrix perturbations_for(bool perturb, const Matrix& lower, Eigen::Index members, Rng& rng) {
    if (!perturb) return Matrix::Zero(lower.rows(), members);
    return detail::draw_perturbations(lower, members, rng);
}

void check_ensemble(const Ensemble& ens, const Vector& y, const MeasurementModel& model) {
    if (ens.size() < 2) throw InsufficientSamplesError("ensemble update: need at least two members");
    if (y.size() != model.noise_cov.rows()) throw DimensionError("ensemble update: measurement size mismatch");
}

}  // namespace

Ensemble enkf_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y, double inflation, Rng& rng,
                     bool perturb_observations) {
    EnsembleUpdateConfig config;
    config.inflation = inflation;
    config.perturb_observations = perturb_observations;
    return bruenkf_update(ens, model, y, config, rng).ensemble;
}

EnsembleResult bruenkf_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y,
                              const EnsembleUpdateConfig& config, Rng& rng) {
    config.validate();
    check_ensemble(ens, y, model);
    const Matrix lower = noise_factor(model, config.perturb_observations);
    const StepSchedule& schedule = config.schedule;

    EnsembleResult result;
    Ensemble current = ens;
    double t = 0.0;
    for (std::size_t i = 0; i < schedule.steps(); ++i) {
        current = inflate(current, std::pow(config.inflation, schedule.coefficient(i)));
        const Matrix cov = empirical_cov(current);
        const Matrix gammas = perturbations_for(config.perturb_observations, lower, current.size(), rng);
        const Matrix increments =
            detail::member_increments(current.members(), cov, model, y, schedule.noise_scale(i), gammas, i + 1);
        current = Ensemble(current.members() + increments);
        t += schedule.coefficient(i);
        result.trace.times.push_back(t);
        if (config.keep_snapshots) result.trace.snapshots.push_back(current);
        ++result.trace.accepted_steps;
    }
    result.ensemble = std::move(current);
    return result;
}

EnsembleResult ec_bruenkf_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y,
                                 const EcEnsembleConfig& config, Rng& rng) {
    const ErrorController& ctrl = config.controller;
    ctrl.validate();
    if (!(config.inflation >= 1.0)) throw InvalidArgumentError("ec_bruenkf_update: inflation must be >= 1");
    check_ensemble(ens, y, model);
    const Matrix lower = noise_factor(model, config.perturb_observations);

    EnsembleResult result;
    Ensemble current = ens;
    double t = 0.0;
    double ds = 1.0 / static_cast<double>(ctrl.initial_steps);
    std::size_t rejections_here = 0;

    while (1.0 - t > 1e-12) {
        if (t + ds > 1.0) ds = 1.0 - t;
        const double scale = 1.0 / ds;
        const std::size_t step_index = result.trace.accepted_steps + 1;

        const Ensemble start = inflate(current, std::pow(config.inflation, ds));
        const Matrix cov = empirical_cov(start);
        const Matrix gammas = perturbations_for(config.perturb_observations, lower, start.size(), rng);
        const Matrix first = detail::member_increments(start.members(), cov, model, y, scale, gammas, step_index);
        Ensemble trial(start.members() + first);
        // Embedded stage: relinearize at the trial members with the trial
        // covariance and the same perturbations.
        const Matrix trial_cov = empirical_cov(trial);
        const Matrix second =
            detail::member_increments(trial.members(), trial_cov, model, y, scale, gammas, step_index);
        const Ensemble midpoint(start.members() + 0.5 * (first + second));

        double err = 0.0;
        if (config.error_on == EcEnsembleConfig::ErrorOn::ensemble_mean) {
            err = ctrl.error_norm(empirical_mean(trial), empirical_mean(midpoint));
        } else {
            for (Eigen::Index j = 0; j < trial.size(); ++j)
                err = std::max(err, ctrl.error_norm(trial.member(j), midpoint.member(j)));
        }
        if (!std::isfinite(err)) throw StalledControllerError("ec_bruenkf_update: non-finite error estimate");
        if (err > 1.0) {
            ds *= ctrl.shrink_factor(err);
            ++result.trace.rejected_steps;
            if (++rejections_here > ctrl.max_rejections) {
                std::ostringstream out;
                out << "ec_bruenkf_update: " << rejections_here << " consecutive rejections at t = " << t;
                throw StalledControllerError(out.str());
            }
            continue;
        }
        rejections_here = 0;
        t += ds;
        current = std::move(trial);
        result.trace.times.push_back(t);
        if (config.keep_snapshots) result.trace.snapshots.push_back(current);
        ++result.trace.accepted_steps;
        ds *= ctrl.growth_factor(err);
    }
    result.ensemble = std::move(current);
    return result;
}

}  // namespace bruf
