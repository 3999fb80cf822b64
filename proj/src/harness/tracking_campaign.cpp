#include "bruf/harness/tracking_campaign.hpp"

#include "bruf/errors.hpp"
#include "bruf/harness/parallel.hpp"
#include "bruf/numeric.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace bruf::harness {

namespace {

constexpr Eigen::Index kPositions[3] = {0, 2, 4};

FilterSpec make_spec(const std::string& name, FilterKind kind, std::size_t steps = 1) {
    FilterSpec f;
    f.name = name;
    f.kind = kind;
    f.steps = steps;
    return f;
}

}  // namespace

std::vector<FilterSpec> default_tracking_filters() {
    std::vector<FilterSpec> out;
    out.push_back(make_spec("EKF", FilterKind::ekf));
    out.push_back(make_spec("BRUF10", FilterKind::bruf, 10));
    out.push_back(make_spec("BRUF25", FilterKind::bruf, 25));
    out.push_back(make_spec("VS-BRUF10", FilterKind::vs_bruf, 10));
    out.push_back(make_spec("VS-BRUF25", FilterKind::vs_bruf, 25));
    FilterSpec ec = make_spec("EC-BRUF", FilterKind::ec_bruf);
    ec.controller.atol = 1e-7;
    ec.controller.rtol = 1e-7;
    ec.controller.initial_steps = 25;
    out.push_back(ec);
    FilterSpec iekf = make_spec("IEKF", FilterKind::iekf);
    iekf.iekf = {25, 1e-9, false};
    out.push_back(iekf);
    return out;
}

TrackingSettings tracking_settings(const Config& config) {
    TrackingSettings s;
    s.seed = config.get_u64("seed", s.seed);
    s.runs = config.get_size("tracking.runs", s.runs);
    s.threads = config.get_size("threads", 0);
    s.scenario.duration = config.get_size("tracking.duration", s.scenario.duration);
    s.scenario.dt = config.get_double("tracking.dt", s.scenario.dt);
    s.scenario.q_tilde = config.get_double("tracking.q_tilde", s.scenario.q_tilde);
    s.scenario.sigma_r = config.get_double("tracking.sigma_r", s.scenario.sigma_r);
    s.scenario.sigma_u = config.get_double("tracking.sigma_u", s.scenario.sigma_u);
    s.scenario.sigma_v = config.get_double("tracking.sigma_v", s.scenario.sigma_v);
    s.snees_from = config.get_size("tracking.snees_from", s.snees_from);
    s.snees_to = config.get_size("tracking.snees_to", s.snees_to);
    s.noiseless = config.get_bool("tracking.noiseless", s.noiseless);
    s.filters = config.has("filters") ? filters_from_config(config) : default_tracking_filters();
    for (const auto& f : s.filters)
        if (is_ensemble(f.kind)) throw ConfigError("tracking: ensemble filter '" + f.name + "' not supported");
    if (s.runs == 0) throw ConfigError("tracking.runs must be positive");
    if (s.scenario.duration < s.first_update) throw ConfigError("tracking.duration too short");
    if (s.snees_from < s.first_update || s.snees_to > s.scenario.duration || s.snees_from > s.snees_to)
        throw ConfigError("tracking: SNEES window outside the tracked steps");
    return s;
}

const TrackingFilterResult& TrackingResult::by_name(const std::string& name) const {
    for (const auto& f : filters)
        if (f.spec.name == name) return f;
    throw std::out_of_range("tracking result: no filter named " + name);
}

TrackingRun simulate_tracking(const TrackingScenario& sc, Rng& rng, bool noiseless) {
    const Matrix f = sc.transition();
    const Matrix q_lower = SpdFactor(sc.process_noise()).lower();
    const MeasurementModel model = ruv_model(sc);
    const Matrix r_lower = SpdFactor(model.noise_cov).lower();
    TrackingRun run;
    Vector x = sc.initial_true_state;
    for (std::size_t k = 1; k <= sc.duration; ++k) {
        if (k > 1) {
            x = f * x;
            if (!noiseless) x += q_lower * rng.standard_normal(6);
        }
        Vector y = model.h(x);
        if (!noiseless) y += r_lower * rng.standard_normal(3);
        run.truth.push_back(x);
        run.measurements.push_back(std::move(y));
    }
    return run;
}

namespace {

RunRecord track_one(const FilterSpec& spec, const TrackingRun& run, const TrackingSettings& s) {
    const TrackingScenario& sc = s.scenario;
    const MeasurementModel model = ruv_model(sc);
    const Matrix f = sc.transition();
    const Matrix q = sc.process_noise();
    RunRecord rec;
    try {
        GaussianBelief belief = tracking_initialize(run.measurements[s.first_update - 3],
                                                    run.measurements[s.first_update - 2], sc);
        for (std::size_t k = s.first_update; k <= sc.duration; ++k) {
            belief.mean = f * belief.mean;
            belief.cov = symmetrized(f * belief.cov * f.transpose() + q);
            belief = apply_update(spec, belief, model, run.measurements[k - 1]);
            if (!belief.mean.allFinite() || !belief.cov.allFinite()) throw EstimationError("non-finite estimate");
            rec.push(run.truth[k - 1], belief.mean, belief.cov);
        }
    } catch (const EstimationError&) {
        rec.diverged = true;
    }
    return rec;
}

}  // namespace

TrackingResult run_tracking(const TrackingSettings& s) {
    if (s.first_update < 3) throw ConfigError("tracking: two measurements are needed before the first update");
    TrackingResult result;
    result.first_step = s.first_update;
    std::vector<TrackingRun> runs(s.runs);
    for (std::size_t i = 0; i < s.runs; ++i) {
        Rng rng = Rng::derive(s.seed, {i, 0});
        runs[i] = simulate_tracking(s.scenario, rng, s.noiseless);
    }
    const std::size_t threads = resolve_threads(s.threads);
    for (const FilterSpec& spec : s.filters) {
        TrackingFilterResult fr;
        fr.spec = spec;
        fr.runs.resize(s.runs);
        const auto t0 = std::chrono::steady_clock::now();
        parallel_for(s.runs, threads, [&](std::size_t i) { fr.runs[i] = track_one(spec, runs[i], s); });
        fr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::vector<RunRecord> ok;
        for (const auto& r : fr.runs) {
            if (r.diverged) ++fr.diverged;
            else ok.push_back(r);
        }
        if (fr.diverged > 0) {
            fr.position_rmse = std::numeric_limits<double>::infinity();
            fr.mean_snees = std::numeric_limits<double>::infinity();
        }
        if (!ok.empty()) {
            fr.rmse_curve = position_rmse_curve(ok, kPositions);
            if (fr.diverged == 0) fr.position_rmse = time_avg_position_rmse(ok, kPositions);
            fr.snees = snees(ok);
            if (fr.diverged == 0) {
                std::vector<double> window;
                for (std::size_t k = s.snees_from; k <= s.snees_to; ++k) {
                    const double v = fr.snees.values[k - s.first_update];
                    if (!std::isnan(v)) window.push_back(v);
                }
                fr.mean_snees = window.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : pairwise_sum(window) / static_cast<double>(window.size());
            }
        }
        result.filters.push_back(std::move(fr));
    }
    return result;
}

void write_tracking(const TrackingResult& result, const TrackingSettings& s, OutputDir& out) {
    std::ostringstream table, curves, timing;
    write_metric_header(table);
    curves << "filter,step,position_rmse,snees\n";
    timing << "filter,seconds\n";
    for (const auto& fr : result.filters) {
        MetricRow row;
        row.filter = fr.spec.name;
        row.n = fr.spec.reported_steps();
        row.seed_base = s.seed;
        auto emit = [&](const std::string& name, double v) {
            row.metric_name = name;
            row.value = v;
            write_metric_row(table, row);
        };
        emit("time_avg_position_rmse_km", fr.position_rmse / 1000.0);
        emit("mean_snees", fr.mean_snees);
        emit("diverged_runs", static_cast<double>(fr.diverged));
        emit("snees_excluded", static_cast<double>(fr.snees.excluded));
        for (std::size_t k = 0; k < fr.rmse_curve.size(); ++k) {
            const double sn = k < fr.snees.values.size() ? fr.snees.values[k] : std::numeric_limits<double>::quiet_NaN();
            curves << fr.spec.name << ',' << k + result.first_step << ',' << format_double(fr.rmse_curve[k]) << ','
                   << format_double(sn) << '\n';
        }
        timing << fr.spec.name << ',' << format_double(fr.seconds) << '\n';
    }
    out.write("tracking_table.csv", table.str());
    out.write("tracking_curves.csv", curves.str());
    out.write_volatile("tracking_timing.csv", timing.str());
}

}  // namespace bruf::harness
