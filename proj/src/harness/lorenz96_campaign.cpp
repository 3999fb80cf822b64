#include "bruf/harness/lorenz96_campaign.hpp"

#include "bruf/errors.hpp"
#include "bruf/harness/parallel.hpp"
#include "bruf/metrics.hpp"
#include "bruf/numeric.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace bruf::harness {

std::vector<FilterSpec> default_lorenz96_filters() {
    std::vector<FilterSpec> out;
    auto make = [&](const std::string& name, FilterKind kind, std::size_t steps) {
        FilterSpec f;
        f.name = name;
        f.kind = kind;
        f.steps = steps;
        f.inflation = 1.06;
        f.controller.atol = 1e-3;
        f.controller.rtol = 1e-3;
        out.push_back(f);
    };
    make("EnKF", FilterKind::enkf, 1);
    make("BRUEnKF", FilterKind::bruenkf, 25);
    make("VS-BRUEnKF", FilterKind::vs_bruenkf, 25);
    make("EC-BRUEnKF", FilterKind::ec_bruenkf, 1);
    make("Gromov", FilterKind::gromov, 1);
    out.back().inflation = 1.0;
    out.back().companion_noise = 0.1;
    return out;
}

Lorenz96Settings lorenz96_settings(const Config& config) {
    Lorenz96Settings s;
    s.seed = config.get_u64("seed", s.seed);
    s.threads = config.get_size("threads", 0);
    s.runs = config.get_size("lorenz96.runs", s.runs);
    s.cycles = config.get_size("lorenz96.cycles", s.cycles);
    s.burn_in = config.get_size("lorenz96.burn_in", s.burn_in);
    s.spinup = config.get_size("lorenz96.spinup", s.spinup);
    s.initial_spread = config.get_double("lorenz96.initial_spread", s.initial_spread);
    s.scenario.n = static_cast<Eigen::Index>(config.get_size("lorenz96.n", static_cast<std::size_t>(s.scenario.n)));
    s.scenario.forcing = config.get_double("lorenz96.forcing", s.scenario.forcing);
    s.scenario.meas_scale = config.get_double("lorenz96.meas_scale", s.scenario.meas_scale);
    s.scenario.gamma = config.get_double("lorenz96.gamma", s.scenario.gamma);
    s.scenario.noise_var = config.get_double("lorenz96.noise_var", s.scenario.noise_var);
    s.scenario.dt_obs = config.get_double("lorenz96.dt_obs", s.scenario.dt_obs);
    s.scenario.substeps = config.get_size("lorenz96.substeps", s.scenario.substeps);
    s.members = config.get_sizes("lorenz96.members", s.members);
    s.m_sweep = config.get_bool("lorenz96.m_sweep", s.m_sweep);
    s.gammas = config.get_doubles("lorenz96.gammas", s.gammas);
    s.gamma_sweep_members = config.get_size("lorenz96.gamma_sweep_members", s.gamma_sweep_members);
    s.convergence_threshold = config.get_double("lorenz96.convergence_threshold", s.convergence_threshold);
    s.filters = config.has("filters") ? filters_from_config(config) : default_lorenz96_filters();
    for (const auto& f : s.filters)
        if (!is_ensemble(f.kind)) throw ConfigError("lorenz96: '" + f.name + "' is not an ensemble filter");
    if (s.runs == 0 || s.cycles == 0) throw ConfigError("lorenz96: runs and cycles must be positive");
    if (s.burn_in >= s.cycles) throw ConfigError("lorenz96.burn_in must be below cycles");
    if ((!s.m_sweep || s.members.empty()) && s.gammas.empty()) throw ConfigError("lorenz96: nothing to sweep");
    if (s.scenario.n < 4) throw ConfigError("lorenz96.n must be at least 4");
    for (std::size_t m : s.members)
        if (m < 2) throw ConfigError("lorenz96.members: need at least 2 members");
    return s;
}

double lorenz96_single_run(const FilterSpec& spec, std::size_t filter_index, std::size_t run_index,
                           std::size_t members, double gamma, const Lorenz96Settings& s) {
    Lorenz96Scenario sc = s.scenario;
    sc.gamma = gamma;
    const DynamicsModel dyn = lorenz96_dynamics(sc);
    const MeasurementModel meas = l96_measurement_model(sc);
    const Eigen::Index n = sc.n;
    const auto m = static_cast<Eigen::Index>(members);
    const double dt = sc.dt_obs;

    Rng truth_rng = Rng::derive(s.seed, {run_index, 0});
    Vector truth = Vector::Constant(n, sc.forcing) + 0.01 * truth_rng.standard_normal(n);
    for (std::size_t k = 0; k < s.spinup; ++k) truth = dyn.propagate(truth, dt);
    const Matrix noise_lower = SpdFactor(meas.noise_cov).lower();

    Rng init_rng = Rng::derive(s.seed, {run_index, 1, members});
    Ensemble ens(Matrix((s.initial_spread * init_rng.standard_normal(n, m)).colwise() + truth));
    Rng rng = Rng::derive(s.seed, {run_index, 2 + filter_index, members});

    GaussianBelief companion{empirical_mean(ens), s.initial_spread * s.initial_spread * Matrix::Identity(n, n)};
    GromovConfig gromov;
    gromov.n_steps = spec.gromov_steps;
    gromov.resample_after_update = spec.resample;
    gromov.recenter_companion = spec.recenter_companion;
    const std::optional<Matrix> companion_noise =
        spec.companion_noise > 0.0 ? std::optional<Matrix>(spec.companion_noise * Matrix::Identity(n, n)) : std::nullopt;

    RunRecord rec;
    try {
        for (std::size_t k = 0; k < s.cycles; ++k) {
            truth = dyn.propagate(truth, dt);
            const Vector y = meas.h(truth) + noise_lower * truth_rng.standard_normal(noise_lower.rows());
            Matrix propagated = ens.members();
            for (Eigen::Index j = 0; j < m; ++j) propagated.col(j) = dyn.propagate(propagated.col(j), dt);
            ens = Ensemble(std::move(propagated));
            if (spec.kind == FilterKind::gromov) {
                companion = companion_predict(companion, dyn, dt, companion_noise);
                GromovResult r = gromov_flow_update(ens, meas, y, companion, gromov, rng);
                ens = std::move(r.ensemble);
                companion = std::move(r.companion);
            } else {
                ens = apply_ensemble_update(spec, ens, meas, y, rng).ensemble;
            }
            const Vector mean = empirical_mean(ens);
            if (!mean.allFinite()) throw EstimationError("non-finite ensemble mean");
            rec.push(truth, mean);
        }
    } catch (const EstimationError&) {
        return std::numeric_limits<double>::infinity();
    }
    const RunRecord one[] = {rec};
    return time_avg_rmse(one, s.burn_in);
}

std::size_t Lorenz96Result::min_converging_members(const std::string& filter, double threshold) const {
    std::size_t best = 0;
    for (const auto& p : points) {
        if (p.filter != filter || p.sweep != "M") continue;
        if (p.mean_rmse < threshold && (best == 0 || p.members < best)) best = p.members;
    }
    return best;
}

const L96Point& Lorenz96Result::point(const std::string& filter, const std::string& sweep, std::size_t members,
                                      double gamma) const {
    for (const auto& p : points)
        if (p.filter == filter && p.sweep == sweep && p.members == members && p.gamma == gamma) return p;
    throw std::out_of_range("lorenz96 result: no such point for " + filter);
}

bool Lorenz96Result::any_configuration_all_diverged() const {
    for (const auto& p : points)
        if (!p.run_rmse.empty() && p.diverged == p.run_rmse.size()) return true;
    return false;
}

Lorenz96Result run_lorenz96(const Lorenz96Settings& s) {
    struct Job {
        std::size_t filter;
        std::string sweep;
        std::size_t members;
        double gamma;
    };
    std::vector<Job> jobs;
    if (s.m_sweep)
        for (std::size_t f = 0; f < s.filters.size(); ++f)
            for (std::size_t m : s.members) jobs.push_back({f, "M", m, s.scenario.gamma});
    for (std::size_t f = 0; f < s.filters.size(); ++f)
        for (double g : s.gammas) jobs.push_back({f, "gamma", s.gamma_sweep_members, g});

    const std::size_t threads = resolve_threads(s.threads);
    Lorenz96Result result;
    for (const Job& job : jobs) {
        L96Point p;
        p.filter = s.filters[job.filter].name;
        p.sweep = job.sweep;
        p.members = job.members;
        p.gamma = job.gamma;
        p.run_rmse.resize(s.runs);
        const auto t0 = std::chrono::steady_clock::now();
        parallel_for(s.runs, threads, [&](std::size_t i) {
            p.run_rmse[i] = lorenz96_single_run(s.filters[job.filter], job.filter, i, job.members, job.gamma, s);
        });
        p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (double v : p.run_rmse)
            if (!std::isfinite(v)) ++p.diverged;
        p.mean_rmse = p.diverged > 0 ? std::numeric_limits<double>::infinity()
                                     : pairwise_sum(p.run_rmse) / static_cast<double>(p.run_rmse.size());
        result.points.push_back(std::move(p));
    }
    return result;
}

void write_lorenz96(const Lorenz96Result& result, const Lorenz96Settings& s, OutputDir& out) {
    std::ostringstream by_m, by_gamma, runs, timing;
    write_metric_header(by_m);
    write_metric_header(by_gamma);
    runs << "filter,sweep,M,gamma,run,time_avg_rmse\n";
    timing << "filter,sweep,M,gamma,seconds\n";
    const auto find_spec = [&](const std::string& name) -> const FilterSpec& {
        for (const auto& f : s.filters)
            if (f.name == name) return f;
        throw std::out_of_range(name);
    };
    for (const auto& p : result.points) {
        MetricRow row;
        row.filter = p.filter;
        row.n = find_spec(p.filter).reported_steps();
        row.m = static_cast<long long>(p.members);
        row.gamma = p.gamma;
        row.seed_base = s.seed;
        std::ostream& dst = p.sweep == "M" ? by_m : by_gamma;
        row.metric_name = "mean_time_avg_rmse";
        row.value = p.mean_rmse;
        write_metric_row(dst, row);
        row.metric_name = "diverged_runs";
        row.value = static_cast<double>(p.diverged);
        write_metric_row(dst, row);
        for (std::size_t i = 0; i < p.run_rmse.size(); ++i)
            runs << p.filter << ',' << p.sweep << ',' << p.members << ',' << format_double(p.gamma) << ',' << i << ','
                 << format_double(p.run_rmse[i]) << '\n';
        timing << p.filter << ',' << p.sweep << ',' << p.members << ',' << format_double(p.gamma) << ','
               << format_double(p.seconds) << '\n';
    }
    if (s.m_sweep) out.write("lorenz96_rmse_vs_M.csv", by_m.str());
    if (!s.gammas.empty()) out.write("lorenz96_rmse_vs_gamma.csv", by_gamma.str());
    out.write("lorenz96_runs.csv", runs.str());
    out.write_volatile("lorenz96_timing.csv", timing.str());
}

}  // namespace bruf::harness
