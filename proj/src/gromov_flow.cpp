#include "bruf/gromov_flow.hpp"

#include "bruf/errors.hpp"
#include "bruf/recursive_update.hpp"

#include <algorithm>
#include <cmath>

namespace bruf {

void GromovConfig::validate() const {
    if (n_steps == 0) throw InvalidArgumentError("gromov: n_steps must be positive");
    if (companion_process_noise && !is_valid_covariance(*companion_process_noise))
        throw NotPsdError("gromov: companion process noise is not PSD");
}

namespace {

// A⁻¹ = P - λPHᵀ(λHPHᵀ + R)⁻¹HP
Matrix flow_cov_impl(const Matrix& p, const Matrix& h, const Matrix& noise_cov, double lambda) {
    if (lambda == 0.0) return p;
    const Matrix hp = h * p;
    Matrix s = lambda * (hp * h.transpose()) + noise_cov;
    try {
        const Matrix a_inv = p - lambda * hp.transpose() * SpdFactor(s).solve(hp);
        return symmetrized(a_inv);
    } catch (const NotPositiveDefiniteError& e) {
        throw e.at({.lambda = lambda});
    }
}

// Symmetric square root of C Cᵀ. With C n×m and m < n this goes through the
// m×m Gram matrix: (CCᵀ)^½ = C (CᵀC)^-½ Cᵀ on the range of C.
Matrix gram_sqrt(const Matrix& c) {
    if (c.cols() >= c.rows()) return symmetric_sqrt(symmetrized(c * c.transpose()));
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(c.transpose() * c));
    const Vector& s2 = eig.eigenvalues();
    const double cutoff = 1e-14 * std::max(s2.maxCoeff(), 0.0);
    Vector inv_s(s2.size());
    for (Eigen::Index i = 0; i < s2.size(); ++i) inv_s(i) = s2(i) > cutoff ? 1.0 / std::sqrt(s2(i)) : 0.0;
    const Matrix cv = c * eig.eigenvectors();
    return symmetrized(cv * inv_s.asDiagonal() * cv.transpose());
}

}  // namespace

Matrix gromov_flow_cov(const Matrix& p, const Matrix& h, const Matrix& noise_cov, double lambda) {
    return flow_cov_impl(p, h, noise_cov, lambda);
}

Vector gromov_drift(const Vector& x, const Matrix& p, const MeasurementModel& model, const Vector& y, double lambda) {
    const Matrix h = model.jacobian(x);
    const Matrix a_inv = flow_cov_impl(p, h, model.noise_cov, lambda);
    return -(a_inv * (h.transpose() * spd_solve(model.noise_cov, Vector(model.h(x) - y))));
}

Matrix gromov_diffusion_cov(const Matrix& p, const Matrix& h, const Matrix& noise_cov, double lambda) {
    const Matrix a_inv = flow_cov_impl(p, h, noise_cov, lambda);
    const Matrix ha = h * a_inv;
    return symmetrized(ha.transpose() * spd_solve(noise_cov, ha));
}

GromovResult gromov_flow_update(const Ensemble& ens, const MeasurementModel& model, const Vector& y,
                                const GaussianBelief& companion, const GromovConfig& config, Rng& rng) {
    config.validate();
    if (ens.empty()) throw InsufficientSamplesError("gromov: empty ensemble");
    if (ens.dim() != companion.dim()) throw DimensionError("gromov: companion dimension mismatch");
    const Matrix& p = companion.cov;
    const double delta = 1.0 / static_cast<double>(config.n_steps);
    const double root_delta = std::sqrt(delta);
    const Eigen::Index n = ens.dim();
    const Eigen::Index count = ens.size();

    const SpdFactor noise(model.noise_cov);
    const Matrix noise_lower = noise.lower();
    Matrix particles = ens.members();
    for (std::size_t k = 0; k < config.n_steps; ++k) {
        const double lambda = static_cast<double>(k) * delta;
        // Noise drawn up front in member order.
        Matrix w = config.diffusion ? Matrix(root_delta * rng.standard_normal(n, count)) : Matrix::Zero(n, count);
        for (Eigen::Index j = 0; j < count; ++j) {
            const Vector x = particles.col(j);
            const Matrix h = model.jacobian(x);
            const Matrix a_inv = flow_cov_impl(p, h, model.noise_cov, lambda);
            Vector step = -(a_inv * (h.transpose() * noise.solve(Vector(model.h(x) - y)))) * delta;
            if (config.diffusion) {
                // Q = CCᵀ with C = A⁻¹HᵀL⁻ᵀ, R = LLᵀ.
                const Matrix c = noise_lower.triangularView<Eigen::Lower>().solve(h * a_inv).transpose();
                step += gram_sqrt(c) * w.col(j);
            }
            particles.col(j) = x + step;
        }
    }

    GromovResult result;
    result.companion = kalman_update(companion, model, y);
    if (config.resample_after_update) {
        const Vector m = particles.rowwise().mean();
        particles = sample_zero_mean(result.companion.cov, count, rng).colwise() + m;
        if (config.recenter_companion) result.companion.mean = m;
    }
    result.ensemble = Ensemble(std::move(particles));
    return result;
}

GaussianBelief companion_predict(const GaussianBelief& belief, const DynamicsModel& dynamics, double duration,
                                 const std::optional<Matrix>& extra_noise) {
    if (!dynamics.cov_propagator) throw InvalidArgumentError("companion_predict: dynamics has no linearization");
    auto [mean, phi] = dynamics.cov_propagator(belief.mean, duration);
    Matrix cov = phi * belief.cov * phi.transpose();
    if (dynamics.process_noise_cov) cov += *dynamics.process_noise_cov;
    if (extra_noise) cov += *extra_noise;
    symmetrize(cov);
    return {std::move(mean), std::move(cov)};
}

}  // namespace bruf
