#pragma once

#include "bruf/linalg.hpp"
#include "bruf/random.hpp"

#include <vector>

namespace bruf {

/// Gaussian state estimate: mean and covariance.
struct GaussianBelief {
    Vector mean;
    Matrix cov;

    Eigen::Index dim() const noexcept { return mean.size(); }

    /// Throws DimensionError / NotPsdError when the invariants do not hold.
    void validate() const;
};

/// Ordered set of M state vectors of equal dimension, stored as the columns
/// of an n×M matrix.
class Ensemble {
public:
    Ensemble() = default;
    explicit Ensemble(Matrix members);
    explicit Ensemble(const std::vector<Vector>& members);

    Eigen::Index size() const noexcept { return members_.cols(); }
    Eigen::Index dim() const noexcept { return members_.rows(); }
    bool empty() const noexcept { return members_.cols() == 0; }

    const Matrix& members() const noexcept { return members_; }
    Vector member(Eigen::Index j) const { return members_.col(j); }

    bool operator==(const Ensemble& other) const;

private:
    Matrix members_;
};

Vector empirical_mean(const Ensemble& ens);

/// Unbiased sample covariance (divisor M-1).
Matrix empirical_cov(const Ensemble& ens);
Matrix empirical_cov(const Ensemble& ens, const Vector& mean);

/// Scales deviations about the mean by `factor` (≥ 1).
Ensemble inflate(const Ensemble& ens, double factor);

/// M independent draws from the belief.
Ensemble sample_ensemble(const GaussianBelief& belief, Eigen::Index count, Rng& rng);

}  // namespace bruf
