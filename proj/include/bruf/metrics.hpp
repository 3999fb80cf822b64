#pragma once

#include "bruf/linalg.hpp"

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace bruf {

/// One Monte Carlo run: truth, estimate and (optionally) covariance per step.
/// A run that blew up keeps the steps it completed and sets `diverged`.
struct RunRecord {
    std::vector<Vector> truth;
    std::vector<Vector> estimate;
    std::vector<Matrix> cov;
    bool diverged = false;

    std::size_t steps() const noexcept { return truth.size(); }
    void push(Vector x_true, Vector x_est);
    void push(Vector x_true, Vector x_est, Matrix p);
    void validate() const;
};

struct SneesSeries {
    /// Values for k = burn_in, burn_in+1, ...; NaN where every run was excluded.
    /// Diverged runs are skipped.
    std::vector<double> values;
    /// Number of (run, step) pairs dropped because P(k) could not be factored.
    std::size_t excluded = 0;
};

SneesSeries snees(std::span<const RunRecord> runs, std::size_t burn_in = 0);

/// (1/n_t) Σ_k sqrt((1/n_m) Σ_i ||ε_p(k)||²) over k ≥ burn_in. +inf if any run diverged.
double time_avg_position_rmse(std::span<const RunRecord> runs, std::span<const Eigen::Index> position_indices,
                              std::size_t burn_in = 0);

/// Same structure over all components with ||ε||²/n inside the root.
double time_avg_rmse(std::span<const RunRecord> runs, std::size_t burn_in = 0);

/// sqrt((1/n_m) Σ_i ||ε_p(k)||²) for every k ≥ burn_in.
std::vector<double> position_rmse_curve(std::span<const RunRecord> runs, std::span<const Eigen::Index> position_indices,
                                        std::size_t burn_in = 0);

/// One CSV row per (filter, parameter point, metric). Negative N/M and NaN
/// gamma are written as empty fields.
struct MetricRow {
    std::string filter;
    long long n = -1;
    long long m = -1;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    unsigned long long seed_base = 0;
    std::string metric_name;
    double value = 0.0;
};

void write_metric_header(std::ostream& out);
void write_metric_row(std::ostream& out, const MetricRow& row);

/// Shortest decimal that round-trips; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

}  // namespace bruf
