#include "bruf/random.hpp"

#include "bruf/errors.hpp"

namespace bruf {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

Rng Rng::split(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 1))); }

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    Rng rng(seed);
    for (auto stream : path) rng = rng.split(stream);
    return rng;
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

Vector Rng::standard_normal(Eigen::Index n) {
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
    return z;
}

Matrix Rng::standard_normal(Eigen::Index rows, Eigen::Index cols) {
    Matrix z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = normal();
    }
    return z;
}

Vector sample_gaussian(const Vector& mean, const Matrix& sqrt_cov, Rng& rng) {
    if (sqrt_cov.rows() != mean.size()) throw DimensionError("sample_gaussian: factor/mean size mismatch");
    return mean + sqrt_cov * rng.standard_normal(sqrt_cov.cols());
}

Matrix sample_zero_mean(const Matrix& cov, Eigen::Index count, Rng& rng) {
    Matrix factor;
    try {
        factor = SpdFactor(cov).lower();
    } catch (const NotPositiveDefiniteError&) {
        factor = symmetric_sqrt(cov);
    }
    return factor * rng.standard_normal(cov.rows(), count);
}

}  // namespace bruf
