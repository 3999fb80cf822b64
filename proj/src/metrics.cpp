#include "bruf/metrics.hpp"

#include "bruf/errors.hpp"
#include "bruf/numeric.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace bruf {

void RunRecord::push(Vector x_true, Vector x_est) {
    truth.push_back(std::move(x_true));
    estimate.push_back(std::move(x_est));
}

void RunRecord::push(Vector x_true, Vector x_est, Matrix p) {
    push(std::move(x_true), std::move(x_est));
    cov.push_back(std::move(p));
}

void RunRecord::validate() const {
    if (truth.size() != estimate.size()) throw DimensionError("run record: truth/estimate length mismatch");
    if (!cov.empty() && cov.size() != truth.size()) throw DimensionError("run record: covariance length mismatch");
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k].size() != estimate[k].size()) throw DimensionError("run record: truth/estimate size mismatch");
        if (!cov.empty() && (cov[k].rows() != truth[k].size() || cov[k].cols() != truth[k].size()))
            throw DimensionError("run record: covariance size mismatch");
    }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t common_length(std::span<const RunRecord> runs) {
    if (runs.empty()) throw InsufficientSamplesError("metrics: no runs");
    std::size_t len = runs.front().steps();
    for (const RunRecord& r : runs) {
        if (!r.diverged) {
            len = r.steps();
            break;
        }
    }
    for (const RunRecord& r : runs) {
        r.validate();
        if (!r.diverged && r.steps() != len) throw DimensionError("metrics: runs differ in length");
    }
    return len;
}

bool any_diverged(std::span<const RunRecord> runs) {
    for (const RunRecord& r : runs) {
        if (r.diverged) return true;
        for (const Vector& e : r.estimate)
            if (!e.allFinite()) return true;
    }
    return false;
}

template <class ErrorSq>
std::vector<double> rms_curve(std::span<const RunRecord> runs, std::size_t burn_in, ErrorSq error_sq) {
    const std::size_t len = common_length(runs);
    std::vector<double> curve;
    std::vector<double> terms;
    for (std::size_t k = burn_in; k < len; ++k) {
        terms.clear();
        // Diverged runs may stop early; the scalar metrics report them as +inf.
        for (const RunRecord& r : runs)
            if (!r.diverged) terms.push_back(error_sq(r.truth[k], r.estimate[k]));
        if (terms.empty()) throw InsufficientSamplesError("metrics: every run diverged");
        curve.push_back(std::sqrt(pairwise_sum(terms) / static_cast<double>(terms.size())));
    }
    return curve;
}

double time_average(const std::vector<double>& curve) {
    if (curve.empty()) throw InsufficientSamplesError("metrics: burn-in leaves no steps");
    return pairwise_sum(curve) / static_cast<double>(curve.size());
}

}  // namespace

SneesSeries snees(std::span<const RunRecord> runs, std::size_t burn_in) {
    const std::size_t len = common_length(runs);
    SneesSeries out;
    for (std::size_t k = burn_in; k < len; ++k) {
        std::vector<double> terms;
        for (const RunRecord& r : runs) {
            if (r.diverged) continue;
            if (r.cov.empty()) throw InvalidArgumentError("snees: run has no covariances");
            const Vector e = r.estimate[k] - r.truth[k];
            try {
                terms.push_back(e.dot(SpdFactor(r.cov[k]).solve(e)) / static_cast<double>(e.size()));
            } catch (const NotPositiveDefiniteError&) {
                ++out.excluded;
            }
        }
        out.values.push_back(terms.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : pairwise_sum(terms) / static_cast<double>(terms.size()));
    }
    return out;
}

std::vector<double> position_rmse_curve(std::span<const RunRecord> runs, std::span<const Eigen::Index> position_indices,
                                        std::size_t burn_in) {
    return rms_curve(runs, burn_in, [&](const Vector& t, const Vector& e) {
        double s = 0.0;
        for (Eigen::Index i : position_indices) s += (e(i) - t(i)) * (e(i) - t(i));
        return s;
    });
}

double time_avg_position_rmse(std::span<const RunRecord> runs, std::span<const Eigen::Index> position_indices,
                              std::size_t burn_in) {
    if (any_diverged(runs)) return kInf;
    return time_average(position_rmse_curve(runs, position_indices, burn_in));
}

double time_avg_rmse(std::span<const RunRecord> runs, std::size_t burn_in) {
    if (any_diverged(runs)) return kInf;
    return time_average(rms_curve(runs, burn_in, [](const Vector& t, const Vector& e) {
        return (e - t).squaredNorm() / static_cast<double>(t.size());
    }));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_metric_header(std::ostream& out) { out << "filter,N,M,gamma,seed_base,metric_name,value\n"; }

void write_metric_row(std::ostream& out, const MetricRow& row) {
    out << row.filter << ',';
    if (row.n >= 0) out << row.n;
    out << ',';
    if (row.m >= 0) out << row.m;
    out << ',';
    if (!std::isnan(row.gamma)) out << format_double(row.gamma);
    out << ',' << row.seed_base << ',' << row.metric_name << ',' << format_double(row.value) << '\n';
}

}  // namespace bruf
