#include "bruf/recursive_update.hpp"

#include "bruf/errors.hpp"
#include "bruf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bruf {

// --- StepSchedule -----------------------------------------------------------

StepSchedule::StepSchedule(Kind kind, std::vector<double> coefficients, std::vector<double> noise_scales)
    : kind_(kind), coefficients_(std::move(coefficients)), noise_scales_(std::move(noise_scales)) {}

StepSchedule StepSchedule::uniform(std::size_t steps) {
    if (steps == 0) throw InvalidArgumentError("schedule: need at least one step");
    const double n = static_cast<double>(steps);
    return StepSchedule(Kind::uniform, std::vector<double>(steps, 1.0 / n), std::vector<double>(steps, n));
}

StepSchedule StepSchedule::variable(std::size_t steps) {
    if (steps == 0) throw InvalidArgumentError("schedule: need at least one step");
    const double total = static_cast<double>(steps) * static_cast<double>(steps + 1) / 2.0;
    std::vector<double> c(steps);
    std::vector<double> scale(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double k = static_cast<double>(i + 1);
        c[i] = k / total;
        scale[i] = total / k;
    }
    return StepSchedule(Kind::variable, std::move(c), std::move(scale));
}

StepSchedule StepSchedule::unchecked(std::vector<double> coefficients) {
    if (coefficients.empty()) throw InvalidArgumentError("schedule: need at least one step");
    std::vector<double> scale(coefficients.size());
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        if (!(coefficients[i] > 0.0)) throw InvalidArgumentError("schedule: coefficients must be positive");
        scale[i] = 1.0 / coefficients[i];
    }
    return StepSchedule(Kind::custom, std::move(coefficients), std::move(scale));
}

StepSchedule StepSchedule::custom(std::vector<double> coefficients) {
    StepSchedule schedule = unchecked(std::move(coefficients));
    const double sum = compensated_sum(schedule.coefficients());
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream out;
        out << "schedule: coefficients sum to " << sum << ", expected 1";
        throw InvalidArgumentError(out.str());
    }
    return schedule;
}

// --- ErrorController --------------------------------------------------------

void ErrorController::validate() const {
    if (!(atol > 0.0) || !(rtol > 0.0)) throw InvalidArgumentError("controller: atol and rtol must be positive");
    if (!(min_factor > 0.0 && min_factor < 1.0 && max_factor > 1.0)) {
        throw InvalidArgumentError("controller: need 0 < f_min < 1 < f_max");
    }
    if (!(safety > 0.0)) throw InvalidArgumentError("controller: safety factor must be positive");
    if (initial_steps == 0) throw InvalidArgumentError("controller: initial step count must be positive");
    if (max_rejections == 0) throw InvalidArgumentError("controller: max_rejections must be positive");
}

namespace {

double proposal(double safety, double err) {
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return safety * std::sqrt(1.0 / err);
}

}  // namespace

double ErrorController::shrink_factor(double err) const {
    return std::min(0.9, std::max(min_factor, proposal(safety, err)));
}

double ErrorController::growth_factor(double err) const {
    return std::min(max_factor, std::max(min_factor, proposal(safety, err)));
}

double ErrorController::error_norm(const Vector& a, const Vector& b) const {
    const Eigen::ArrayXd scale = atol + a.array().abs().max(b.array().abs()) * rtol;
    const Eigen::ArrayXd scaled = (a - b).array() / scale;
    return std::sqrt(scaled.square().mean());
}

// --- single-state updates -----------------------------------------------------

LinearizedStep linearized_step(const Vector& x, const Matrix& cov, const MeasurementModel& model, const Vector& y,
                               double noise_scale, bool joseph_form) {
    LinearizedStep step;
    step.jacobian = model.jacobian(x);
    const Matrix& h = step.jacobian;
    if (h.cols() != x.size() || h.rows() != y.size() || model.noise_cov.rows() != y.size()) {
        throw DimensionError("linearized_step: Jacobian, measurement, and noise dimensions disagree");
    }
    const Matrix hp = h * cov;
    const Matrix s = hp * h.transpose() + noise_scale * model.noise_cov;
    step.gain = SpdFactor(s).solve(hp).transpose();
    step.delta = step.gain * (y - model.h(x));
    if (joseph_form) {
        Matrix ikh = -step.gain * h;
        ikh.diagonal().array() += 1.0;
        step.cov = ikh * cov * ikh.transpose() + noise_scale * step.gain * model.noise_cov * step.gain.transpose();
    } else {
        step.cov = cov - step.gain * hp;
    }
    symmetrize(step.cov);
    return step;
}

GaussianBelief kalman_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                             const UpdateOptions& options) {
    LinearizedStep step = linearized_step(prior.mean, prior.cov, model, y, 1.0, options.joseph_form);
    return {prior.mean + step.delta, std::move(step.cov)};
}

GaussianBelief information_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y) {
    const Eigen::Index n = prior.dim();
    const Matrix h = model.jacobian(prior.mean);
    const Matrix identity = Matrix::Identity(n, n);
    Matrix prior_info;
    try {
        prior_info = SpdFactor(prior.cov).solve(identity);
    } catch (const NotPositiveDefiniteError& e) {
        throw NotInvertibleError(std::string("information_update: prior covariance is singular: ") + e.what());
    }
    symmetrize(prior_info);
    const SpdFactor noise(model.noise_cov);
    const Matrix rinv_h = noise.solve(h);
    const Vector y_lin = y - model.h(prior.mean) + h * prior.mean;

    Matrix post_info = prior_info + h.transpose() * rinv_h;
    symmetrize(post_info);
    const Vector post_state = prior_info * prior.mean + rinv_h.transpose() * y_lin;

    const SpdFactor post(post_info);
    Matrix cov = post.solve(identity);
    symmetrize(cov);
    return {post.solve(post_state), std::move(cov)};
}

RecursiveResult bruf_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                            const StepSchedule& schedule, const UpdateOptions& options) {
    RecursiveResult result;
    Vector x = prior.mean;
    Matrix p = prior.cov;
    double t = 0.0;
    for (std::size_t i = 0; i < schedule.steps(); ++i) {
        LinearizedStep step;
        try {
            step = linearized_step(x, p, model, y, schedule.noise_scale(i), options.joseph_form);
        } catch (const NotPositiveDefiniteError& e) {
            throw e.at({.step = i + 1});
        }
        x += step.delta;
        p = std::move(step.cov);
        t += schedule.coefficient(i);
        ++result.trace.accepted_steps;
        if (options.record_trace) result.trace.iterates.push_back({t, x, p});
    }
    result.posterior = {std::move(x), std::move(p)};
    return result;
}

RecursiveResult ec_bruf_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                               const ErrorController& controller, const UpdateOptions& options) {
    controller.validate();
    RecursiveResult result;
    Vector x = prior.mean;
    Matrix p = prior.cov;
    double t = 0.0;
    double ds = 1.0 / static_cast<double>(controller.initial_steps);
    std::size_t rejections_here = 0;

    while (1.0 - t > 1e-12) {
        if (t + ds > 1.0) ds = 1.0 - t;
        const double scale = 1.0 / ds;
        const std::size_t step_index = result.trace.accepted_steps + 1;
        LinearizedStep first;
        LinearizedStep second;
        try {
            first = linearized_step(x, p, model, y, scale, options.joseph_form);
            const Vector trial = x + first.delta;
            second = linearized_step(trial, first.cov, model, y, scale, options.joseph_form);
        } catch (const NotPositiveDefiniteError& e) {
            throw e.at({.step = step_index});
        }
        Vector euler = x + first.delta;
        const Vector midpoint = x + 0.5 * (first.delta + second.delta);
        const double err = controller.error_norm(euler, midpoint);

        if (!std::isfinite(err)) throw StalledControllerError("ec_bruf_update: non-finite error estimate");
        if (err > 1.0) {
            ds *= controller.shrink_factor(err);
            ++result.trace.rejected_steps;
            if (++rejections_here > controller.max_rejections) {
                std::ostringstream out;
                out << "ec_bruf_update: " << rejections_here << " consecutive rejections at t = " << t;
                throw StalledControllerError(out.str());
            }
            continue;
        }
        rejections_here = 0;
        t += ds;
        x = std::move(euler);
        p = std::move(first.cov);
        ++result.trace.accepted_steps;
        if (options.record_trace) result.trace.iterates.push_back({t, x, p});
        ds *= controller.growth_factor(err);
    }
    result.posterior = {std::move(x), std::move(p)};
    return result;
}

// --- iterated EKF -------------------------------------------------------------

double map_objective(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y, const Vector& x) {
    const Vector dx = x - prior.mean;
    const Vector r = y - model.h(x);
    return dx.dot(spd_solve(prior.cov, dx)) + r.dot(spd_solve(model.noise_cov, r));
}

RecursiveResult iekf_update(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                            const IekfOptions& options, const UpdateOptions& update_options) {
    if (options.max_iters == 0) throw InvalidArgumentError("iekf_update: max_iters must be at least 1");
    constexpr int max_halvings = 60;

    RecursiveResult result;
    Vector x = prior.mean;
    double objective = options.line_search ? map_objective(prior, model, y, x) : 0.0;
    Matrix last_gain;
    Matrix last_jacobian;
    Matrix last_hp;
    std::vector<Vector> states;

    for (std::size_t k = 0; k < options.max_iters; ++k) {
        const Matrix h = model.jacobian(x);
        const Matrix hp = h * prior.cov;
        const Matrix s = hp * h.transpose() + model.noise_cov;
        Matrix gain;
        try {
            gain = SpdFactor(s).solve(hp).transpose();
        } catch (const NotPositiveDefiniteError& e) {
            throw e.at({.step = k + 1});
        }
        Vector candidate = prior.mean + gain * (y - model.h(x) - h * (prior.mean - x));

        Vector next;
        if (!options.line_search) {
            next = std::move(candidate);
        } else {
            const Vector direction = candidate - x;
            double cand_objective = map_objective(prior, model, y, candidate);
            // A Gauss-Newton step at rounding level means x is already stationary.
            const bool stationary = direction.norm() <= 1e-12 * (1.0 + x.norm());
            if (cand_objective < objective || direction.norm() < options.tol || stationary) {
                next = std::move(candidate);
                objective = std::min(objective, cand_objective);
            } else {
                double factor = 1.0;
                bool found = false;
                for (int j = 1; j <= max_halvings; ++j) {
                    factor *= 0.5;
                    Vector trial = x + factor * direction;
                    const double trial_objective = map_objective(prior, model, y, trial);
                    if (trial_objective < objective) {
                        next = std::move(trial);
                        objective = trial_objective;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    std::ostringstream out;
                    out << "iekf_update: line search found no descent at iteration " << k + 1;
                    throw NoDescentError(out.str());
                }
            }
        }

        const double change = (next - x).norm();
        x = std::move(next);
        last_gain = std::move(gain);
        last_jacobian = h;
        last_hp = hp;
        ++result.trace.accepted_steps;
        if (update_options.record_trace) {
            Matrix p = prior.cov - last_gain * last_hp;
            symmetrize(p);
            result.trace.iterates.push_back({static_cast<double>(k + 1), x, std::move(p)});
        }
        if (change < options.tol) break;
    }

    Matrix p;
    if (update_options.joseph_form) {
        Matrix ikh = -last_gain * last_jacobian;
        ikh.diagonal().array() += 1.0;
        p = ikh * prior.cov * ikh.transpose() + last_gain * model.noise_cov * last_gain.transpose();
    } else {
        p = prior.cov - last_gain * last_hp;
    }
    symmetrize(p);
    // Pseudo-time of iterate k is k / (iterations run).
    const double total = static_cast<double>(result.trace.accepted_steps);
    for (auto& it : result.trace.iterates) it.t /= total;
    result.posterior = {std::move(x), std::move(p)};
    return result;
}

}  // namespace bruf
