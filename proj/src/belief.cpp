#include "bruf/belief.hpp"

#include "bruf/errors.hpp"

#include <sstream>

namespace bruf {

void GaussianBelief::validate() const {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        std::ostringstream out;
        out << "belief: covariance is " << cov.rows() << "x" << cov.cols() << " for a state of length " << mean.size();
        throw DimensionError(out.str());
    }
    if (!is_valid_covariance(cov)) throw NotPsdError("belief: covariance is not symmetric positive semi-definite");
}

Ensemble::Ensemble(Matrix members) : members_(std::move(members)) {}

Ensemble::Ensemble(const std::vector<Vector>& members) {
    if (members.empty()) return;
    const Eigen::Index n = members.front().size();
    members_.resize(n, static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) {
        if (members[j].size() != n) throw DimensionError("ensemble: members have different dimensions");
        members_.col(static_cast<Eigen::Index>(j)) = members[j];
    }
}

bool Ensemble::operator==(const Ensemble& other) const {
    return members_.rows() == other.members_.rows() && members_.cols() == other.members_.cols() &&
           members_ == other.members_;
}

Vector empirical_mean(const Ensemble& ens) {
    if (ens.empty()) throw DimensionError("empirical_mean: empty ensemble");
    return ens.members().rowwise().mean();
}

Matrix empirical_cov(const Ensemble& ens, const Vector& mean) {
    if (ens.size() < 2) throw InsufficientSamplesError("empirical_cov: need at least two members");
    const Matrix dev = ens.members().colwise() - mean;
    Matrix cov(dev.rows(), dev.rows());
    // Only the lower triangle is accumulated, then mirrored, so the result is
    // exactly symmetric.
    cov.setZero();
    cov.selfadjointView<Eigen::Lower>().rankUpdate(dev, 1.0 / static_cast<double>(ens.size() - 1));
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return cov;
}

Matrix empirical_cov(const Ensemble& ens) { return empirical_cov(ens, empirical_mean(ens)); }

Ensemble inflate(const Ensemble& ens, double factor) {
    if (!(factor >= 1.0)) throw InvalidArgumentError("inflate: factor must be >= 1");
    if (factor == 1.0) return ens;
    const Vector m = empirical_mean(ens);
    Matrix out = (factor * (ens.members().colwise() - m)).colwise() + m;
    return Ensemble(std::move(out));
}

Ensemble sample_ensemble(const GaussianBelief& belief, Eigen::Index count, Rng& rng) {
    Matrix draws = sample_zero_mean(belief.cov, count, rng);
    draws.colwise() += belief.mean;
    return Ensemble(std::move(draws));
}

}  // namespace bruf
