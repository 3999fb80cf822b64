#pragma once

#include "bruf/ensemble_update.hpp"
#include "bruf/gromov_flow.hpp"
#include "bruf/harness/config.hpp"
#include "bruf/recursive_update.hpp"

#include <string>
#include <vector>

namespace bruf::harness {

enum class FilterKind { ekf, iekf, bruf, vs_bruf, ec_bruf, enkf, bruenkf, vs_bruenkf, ec_bruenkf, gromov };

FilterKind parse_filter_kind(const std::string& text);
std::string to_string(FilterKind kind);
bool is_ensemble(FilterKind kind);

struct FilterSpec {
    std::string name;
    FilterKind kind = FilterKind::ekf;
    std::size_t steps = 1;
    ErrorController controller;
    IekfOptions iekf;
    double inflation = 1.0;
    bool perturb = true;
    bool joseph = false;
    std::size_t gromov_steps = 20;
    double companion_noise = 0.0;
    bool resample = true;
    bool recenter_companion = false;
    EcEnsembleConfig::ErrorOn ec_error_on = EcEnsembleConfig::ErrorOn::ensemble_mean;

    /// Schedule for bruf/vs_bruf/bruenkf/vs_bruenkf.
    StepSchedule schedule() const;
    /// N as reported in metric tables; -1 where it does not apply.
    long long reported_steps() const;
};

/// Reads [filter.NAME] sections for each name in the `filters` list. Keys:
/// kind, steps, atol, rtol, safety, min_factor, max_factor, initial_steps,
/// max_rejections, max_iters, tol, line_search, inflation, perturb, joseph,
/// gromov_steps, companion_noise, resample, recenter_companion,
/// error_on (mean | worst_member).
std::vector<FilterSpec> filters_from_config(const Config& config, const std::string& list_key = "filters");

/// Single-state update; `trace` receives the iterates when non-null.
GaussianBelief apply_update(const FilterSpec& spec, const GaussianBelief& prior, const MeasurementModel& model,
                            const Vector& y, UpdateTrace* trace = nullptr);

struct EnsembleStepOutput {
    Ensemble ensemble;
    EnsembleTrace trace;
};

/// Ensemble update for every ensemble kind except gromov (which needs the
/// companion; see gromov_flow_update).
EnsembleStepOutput apply_ensemble_update(const FilterSpec& spec, const Ensemble& ens, const MeasurementModel& model,
                                         const Vector& y, Rng& rng, bool keep_snapshots = false);

}  // namespace bruf::harness
