#pragma once

#include "bruf/harness/config.hpp"
#include "bruf/harness/filters.hpp"
#include "bruf/harness/output.hpp"
#include "bruf/metrics.hpp"
#include "bruf/models/tracking.hpp"

#include <cstdint>
#include <vector>

namespace bruf::harness {

struct TrackingSettings {
    TrackingScenario scenario;
    std::uint64_t seed = 1;
    std::size_t runs = 100;
    std::vector<FilterSpec> filters;
    /// First step (1-based measurement index) with a measurement update.
    std::size_t first_update = 3;
    /// SNEES averaging window, inclusive, in 1-based steps.
    std::size_t snees_from = 100;
    std::size_t snees_to = 300;
    bool noiseless = false;
    std::size_t threads = 0;
};

/// The six filters of the tracking table plus the EKF baseline.
std::vector<FilterSpec> default_tracking_filters();
TrackingSettings tracking_settings(const Config& config);

struct TrackingFilterResult {
    FilterSpec spec;
    std::vector<RunRecord> runs;  ///< steps first_update..duration
    double position_rmse = 0.0;   ///< meters
    std::vector<double> rmse_curve;
    SneesSeries snees;
    double mean_snees = 0.0;      ///< over the SNEES window
    std::size_t diverged = 0;
    double seconds = 0.0;
};

struct TrackingResult {
    std::vector<TrackingFilterResult> filters;
    std::size_t first_step = 3;

    const TrackingFilterResult& by_name(const std::string& name) const;
};

/// One simulated truth and measurement history per run, shared by all filters.
struct TrackingRun {
    std::vector<Vector> truth;         ///< index k-1 holds step k
    std::vector<Vector> measurements;
};

TrackingRun simulate_tracking(const TrackingScenario& scenario, Rng& rng, bool noiseless = false);

TrackingResult run_tracking(const TrackingSettings& settings);
void write_tracking(const TrackingResult& result, const TrackingSettings& settings, OutputDir& out);

}  // namespace bruf::harness
