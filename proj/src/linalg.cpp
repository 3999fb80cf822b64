#include "bruf/linalg.hpp"

#include "bruf/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bruf {

std::string FailureSite::describe() const {
    std::ostringstream out;
    const char* sep = "";
    if (step) {
        out << "step " << *step;
        sep = ", ";
    }
    if (member) {
        out << sep << "member " << *member;
        sep = ", ";
    }
    if (lambda) out << sep << "lambda " << *lambda;
    return out.str();
}

namespace {

std::string pd_message(std::size_t pivot, const FailureSite& site) {
    std::ostringstream out;
    out << "matrix is not positive definite (pivot " << pivot << ")";
    const auto where = site.describe();
    if (!where.empty()) out << " at " << where;
    return out.str();
}

// Unblocked Cholesky used only to locate the failing pivot after Eigen's LLT
// reports a numerical issue.
std::size_t first_bad_pivot(const Matrix& a) {
    const Eigen::Index n = a.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0)) return static_cast<std::size_t>(j);
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return static_cast<std::size_t>(n > 0 ? n - 1 : 0);
}

}  // namespace

NotPositiveDefiniteError::NotPositiveDefiniteError(std::size_t pivot, FailureSite site)
    : EstimationError(pd_message(pivot, site)), pivot_(pivot), site_(site) {}

NotPositiveDefiniteError NotPositiveDefiniteError::at(FailureSite site) const {
    if (!site.step) site.step = site_.step;
    if (!site.member) site.member = site_.member;
    if (!site.lambda) site.lambda = site_.lambda;
    return NotPositiveDefiniteError(pivot_, site);
}

DivergenceError::DivergenceError(std::size_t substep, const std::string& what)
    : EstimationError(what), substep_(substep) {}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

void symmetrize(Matrix& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    }
}

SpdFactor::SpdFactor(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("spd factorization needs a square matrix");
    Matrix sym = symmetrized(a);
    if (!sym.allFinite()) throw NotPositiveDefiniteError(0);
    llt_.compute(sym);
    if (llt_.info() != Eigen::Success) throw NotPositiveDefiniteError(first_bad_pivot(sym));
    const auto diag = llt_.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0)) throw NotPositiveDefiniteError(static_cast<std::size_t>(i));
    }
}

Matrix SpdFactor::solve(const Matrix& b) const {
    if (b.rows() != llt_.rows()) throw DimensionError("spd_solve: right-hand side has wrong row count");
    return llt_.solve(b);
}

Vector SpdFactor::solve(const Vector& b) const {
    if (b.size() != llt_.rows()) throw DimensionError("spd_solve: right-hand side has wrong length");
    return llt_.solve(b);
}

Matrix SpdFactor::lower() const { return llt_.matrixL(); }

Matrix spd_solve(const Matrix& a, const Matrix& b) { return SpdFactor(a).solve(b); }

Vector spd_solve(const Matrix& a, const Vector& b) { return SpdFactor(a).solve(b); }

Matrix symmetric_sqrt(const Matrix& q) {
    if (q.rows() != q.cols()) throw DimensionError("symmetric_sqrt needs a square matrix");
    const Eigen::Index n = q.rows();
    if (n == 0) return Matrix(0, 0);
    Matrix sym = symmetrized(q);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw NotPsdError("symmetric_sqrt: eigendecomposition failed");
    const double tol = 1e-10 * std::abs(sym.trace()) / static_cast<double>(n);
    Vector roots(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = eig.eigenvalues()(i);
        if (lambda < -tol) {
            std::ostringstream out;
            out << "symmetric_sqrt: eigenvalue " << lambda << " below tolerance " << -tol;
            throw NotPsdError(out.str());
        }
        roots(i) = std::sqrt(std::max(lambda, 0.0));
    }
    const Matrix& v = eig.eigenvectors();
    return v * roots.asDiagonal() * v.transpose();
}

double asymmetry(const Matrix& a) { return (a - a.transpose()).cwiseAbs().maxCoeff(); }

bool is_valid_covariance(const Matrix& p) {
    if (p.rows() != p.cols() || !p.allFinite()) return false;
    const Eigen::Index n = p.rows();
    if (n == 0) return true;
    const double scale = p.cwiseAbs().maxCoeff();
    if (asymmetry(p) > 1e-12 * scale) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(p), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -1e-10 * std::abs(p.trace()) / static_cast<double>(n);
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x) {
    const Vector f0 = f(x);
    Matrix jac(f0.size(), x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = std::max(1e-6, 1e-6 * std::abs(x(i)));
        probe(i) = x(i) + step;
        const Vector up = f(probe);
        probe(i) = x(i) - step;
        const Vector down = f(probe);
        probe(i) = x(i);
        jac.col(i) = (up - down) / (2.0 * step);
    }
    return jac;
}

}  // namespace bruf
