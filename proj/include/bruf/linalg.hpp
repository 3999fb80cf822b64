#pragma once

#include <Eigen/Dense>

#include <functional>

namespace bruf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// (A + Aᵀ)/2. Every covariance produced by the library passes through this.
Matrix symmetrized(const Matrix& a);
void symmetrize(Matrix& a);

/// Cholesky factor of a symmetric positive definite matrix.
///
/// The input is symmetrized before factoring. A non-positive pivot raises
/// NotPositiveDefiniteError carrying the zero-based pivot index.
class SpdFactor {
public:
    explicit SpdFactor(const Matrix& a);

    Matrix solve(const Matrix& b) const;
    Vector solve(const Vector& b) const;
    /// Lower-triangular L with L Lᵀ = A.
    Matrix lower() const;
    Eigen::Index size() const noexcept { return llt_.rows(); }

private:
    Eigen::LLT<Matrix> llt_;
};

/// Solves A X = B for symmetric positive definite A without forming A⁻¹.
Matrix spd_solve(const Matrix& a, const Matrix& b);
Vector spd_solve(const Matrix& a, const Vector& b);

/// B with B Bᵀ = Q from the spectral decomposition of a PSD matrix.
/// Eigenvalues in [-1e-10·trace/n, 0) are clamped to zero; anything lower
/// raises NotPsdError.
Matrix symmetric_sqrt(const Matrix& q);

/// Largest |A - Aᵀ| entry.
double asymmetry(const Matrix& a);

/// Checks the covariance invariants: symmetric to 1e-12 relative and
/// smallest eigenvalue ≥ -1e-10·trace/n.
bool is_valid_covariance(const Matrix& p);

/// Central differences with per-coordinate step max(1e-6, 1e-6·|x_i|).
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x);

}  // namespace bruf
