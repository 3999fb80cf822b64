#pragma once

#include "bruf/harness/config.hpp"
#include "bruf/harness/output.hpp"
#include "bruf/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bruf::harness {

struct TheoremCheckSettings {
    std::uint64_t seed = 1;
    std::size_t problems = 500;
    std::vector<std::size_t> steps{1, 2, 3, 5, 10, 20};
    std::size_t custom_schedules = 100;
    std::size_t max_state_dim = 8;
    std::size_t max_meas_dim = 6;
    double tolerance = 1e-10;
    /// Σc_i of the custom schedules. Anything other than 1 is a negative control.
    double schedule_sum = 1.0;
};

TheoremCheckSettings theorem_settings(const Config& config);

struct LinearProblem {
    Vector prior_mean;
    Matrix prior_cov;
    Matrix h;
    Matrix noise_cov;
    Vector y;
};

/// n in [1, max_n], m in [1, max_m]; SPD matrices are AAᵀ/k + 0.1 I.
LinearProblem random_linear_problem(std::uint64_t seed, std::size_t max_n, std::size_t max_m);

struct TheoremRow {
    std::size_t n = 0;
    std::size_t m = 0;
    std::string schedule;  ///< uniform, variable or custom
    std::size_t steps = 0;
    std::size_t instances = 0;
    double max_state_dev = 0.0;
    double max_cov_dev = 0.0;
};

struct TheoremWorst {
    double deviation = 0.0;
    std::string schedule;
    std::vector<double> coefficients;
    LinearProblem problem;
};

struct TheoremReport {
    std::vector<TheoremRow> rows;
    TheoremWorst worst;
    double max_deviation = 0.0;
    bool passed = true;
    double tolerance = 0.0;
};

/// ‖x_N - x̂‖/(1+‖x̂‖) and ‖P_N - P̂‖_F/‖P̂‖_F of the recursive update against
/// one Kalman update, maximized over rows keyed by (n, m, schedule kind, N).
TheoremReport run_theorem_check(const TheoremCheckSettings& settings);

void write_theorem_report(const TheoremReport& report, OutputDir& out);

}  // namespace bruf::harness
