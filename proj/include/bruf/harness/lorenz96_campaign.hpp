#pragma once

#include "bruf/harness/config.hpp"
#include "bruf/harness/filters.hpp"
#include "bruf/harness/output.hpp"
#include "bruf/models/lorenz96.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bruf::harness {

struct Lorenz96Settings {
    Lorenz96Scenario scenario;
    std::uint64_t seed = 1;
    std::size_t runs = 10;
    std::size_t cycles = 350;
    std::size_t burn_in = 50;
    std::size_t spinup = 500;
    double initial_spread = 1.0;
    std::vector<FilterSpec> filters;
    /// M-sweep at scenario.gamma.
    std::vector<std::size_t> members{10, 15, 20, 25, 30, 35, 40};
    /// γ-sweep at gamma_sweep_members; empty disables it.
    std::vector<double> gammas{};
    std::size_t gamma_sweep_members = 25;
    bool m_sweep = true;
    double convergence_threshold = 1.0;
    std::size_t threads = 0;
};

/// EnKF, BRUEnKF(25), VS-BRUEnKF(25), EC-BRUEnKF(1e-3) and Gromov flow, α = 1.06.
std::vector<FilterSpec> default_lorenz96_filters();
Lorenz96Settings lorenz96_settings(const Config& config);

struct L96Point {
    std::string filter;
    std::string sweep;  ///< "M" or "gamma"
    std::size_t members = 0;
    double gamma = 0.0;
    std::vector<double> run_rmse;  ///< per-run time-averaged RMSE, +inf when diverged
    double mean_rmse = 0.0;        ///< mean of run_rmse
    std::size_t diverged = 0;
    double seconds = 0.0;
};

struct Lorenz96Result {
    std::vector<L96Point> points;

    /// Smallest swept M whose mean RMSE is below the threshold, 0 if none.
    std::size_t min_converging_members(const std::string& filter, double threshold) const;
    const L96Point& point(const std::string& filter, const std::string& sweep, std::size_t members, double gamma) const;
    bool any_configuration_all_diverged() const;
};

/// Time-averaged RMSE (RMS over components, steps ≥ burn_in) of one filter on
/// one run. Run i draws truth and noise from derive(seed, {i, 0}); the initial
/// ensemble from derive(seed, {i, 1, M}); filter j from derive(seed, {i, 2 + j, M}).
double lorenz96_single_run(const FilterSpec& spec, std::size_t filter_index, std::size_t run_index,
                           std::size_t members, double gamma, const Lorenz96Settings& settings);

Lorenz96Result run_lorenz96(const Lorenz96Settings& settings);
void write_lorenz96(const Lorenz96Result& result, const Lorenz96Settings& settings, OutputDir& out);

}  // namespace bruf::harness
