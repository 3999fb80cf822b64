#pragma once

#include "bruf/linalg.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bruf {

/// Seedable generator with deterministic splitting.
///
/// A child produced by split(k) depends only on the parent's seed and k, never
/// on how many draws the parent has made, so Monte Carlo run i / filter j can
/// be given Rng::derive(seed, {i, j}) and reproduce regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng split(std::uint64_t stream) const;
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    std::uint64_t seed() const noexcept { return seed_; }

    double normal();
    double uniform();
    Vector standard_normal(Eigen::Index n);
    Matrix standard_normal(Eigen::Index rows, Eigen::Index cols);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// mean + sqrt_cov · z with z standard normal.
Vector sample_gaussian(const Vector& mean, const Matrix& sqrt_cov, Rng& rng);

/// Columns drawn from N(0, cov). Uses a Cholesky factor when cov is positive
/// definite and falls back to symmetric_sqrt for semi-definite input.
Matrix sample_zero_mean(const Matrix& cov, Eigen::Index count, Rng& rng);

}  // namespace bruf
