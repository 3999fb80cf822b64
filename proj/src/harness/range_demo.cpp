#include "bruf/harness/range_demo.hpp"

#include "bruf/ensemble_update.hpp"
#include "bruf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bruf::harness {

RangeDemoSettings range_settings(const Config& config) {
    RangeDemoSettings s;
    s.seed = config.get_u64("seed", s.seed);
    s.scenario.prior.mean(0) = config.get_double("range.prior_x", s.scenario.prior.mean(0));
    s.scenario.prior.mean(1) = config.get_double("range.prior_y", s.scenario.prior.mean(1));
    s.scenario.noise_var = config.get_double("range.noise_var", s.scenario.noise_var);
    s.scenario.observed = config.get_double("range.observed", s.scenario.observed);
    s.steps = config.get_size("range.steps", s.steps);
    s.convergence_steps = config.get_sizes("range.convergence_steps", s.convergence_steps);
    s.ec_tol = config.get_double("range.ec_tol", s.ec_tol);
    s.ec_initial_steps = config.get_size("range.ec_initial_steps", s.ec_initial_steps);
    s.members = static_cast<Eigen::Index>(config.get_size("range.members", static_cast<std::size_t>(s.members)));
    s.ensemble_steps = config.get_size("range.ensemble_steps", s.ensemble_steps);
    s.ensemble_ec_tol = config.get_double("range.ensemble_ec_tol", s.ensemble_ec_tol);
    s.ensemble_inflation = config.get_double("range.ensemble_inflation", s.ensemble_inflation);
    s.snapshot_steps = config.get_sizes("range.snapshot_steps", s.snapshot_steps);
    s.grid_resolution =
        static_cast<Eigen::Index>(config.get_size("range.grid_resolution", static_cast<std::size_t>(s.grid_resolution)));
    s.export_resolution = static_cast<Eigen::Index>(
        config.get_size("range.export_resolution", static_cast<std::size_t>(s.export_resolution)));
    const auto b = config.get_doubles("range.bounds", {s.bounds.x_min, s.bounds.x_max, s.bounds.y_min, s.bounds.y_max});
    if (b.size() != 4) throw ConfigError("range.bounds expects x_min, x_max, y_min, y_max");
    s.bounds = {b[0], b[1], b[2], b[3]};
    s.ring_band = config.get_double("range.ring_band", s.ring_band);
    s.hdr_mass = config.get_double("range.hdr_mass", s.hdr_mass);
    if (s.steps == 0 || s.ensemble_steps == 0 || s.ec_initial_steps == 0) throw ConfigError("range: steps must be positive");
    if (s.members < 2) throw ConfigError("range.members must be at least 2");
    if (!(s.scenario.noise_var > 0.0)) throw ConfigError("range.noise_var must be positive");
    return s;
}

std::pair<double, Eigen::Vector2d> covariance_axes(const Matrix& cov, const Eigen::Vector2d& reference_minor) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(Eigen::Matrix2d(symmetrized(cov)));
    const Eigen::Vector2d values = eig.eigenvalues().cwiseMax(0.0);
    Eigen::Vector2d minor = eig.eigenvectors().col(0);
    if (minor.dot(reference_minor) < 0.0) minor = -minor;
    return {std::sqrt(values(1)), std::sqrt(values(0)) * minor};
}

namespace {

ErrorController range_controller(double tol, std::size_t initial) {
    ErrorController c;
    c.atol = tol;
    c.rtol = tol;
    c.initial_steps = initial;
    return c;
}

}  // namespace

RangeDemoResult run_range_demo(const RangeDemoSettings& s) {
    const MeasurementModel model = range_model(s.scenario.noise_var);
    const GaussianBelief& prior = s.scenario.prior;
    const Vector y = s.scenario.measurement();

    RangeDemoResult res;
    res.grid = grid_posterior(prior, model, y, s.bounds, s.grid_resolution);
    res.map = map_of(res.grid);
    res.oracle_mean = res.grid.mean();
    res.oracle_cov = res.grid.covariance();
    const auto oracle_axes = covariance_axes(res.oracle_cov, Eigen::Vector2d(1.0, 0.0));
    const Eigen::Vector2d oracle_minor = oracle_axes.second;

    auto add_filter = [&](const std::string& name, RecursiveResult r) {
        const double d = (r.posterior.mean - res.map).norm();
        res.filters.push_back({name, std::move(r.posterior), std::move(r.trace), d});
    };
    UpdateOptions opt;
    {
        RecursiveResult ekf;
        ekf.posterior = kalman_update(prior, model, y);
        ekf.trace.iterates.push_back({1.0, ekf.posterior.mean, ekf.posterior.cov});
        ekf.trace.accepted_steps = 1;
        add_filter("ekf", std::move(ekf));
    }
    add_filter("bruf", bruf_update(prior, model, y, StepSchedule::uniform(s.steps), opt));
    add_filter("vs_bruf", bruf_update(prior, model, y, StepSchedule::variable(s.steps), opt));
    add_filter("ec_bruf", ec_bruf_update(prior, model, y, range_controller(s.ec_tol, s.ec_initial_steps), opt));
    add_filter("iekf_ls", iekf_update(prior, model, y, {s.steps, 0.0, true}, opt));
    RecursiveResult plain = iekf_update(prior, model, y, {s.steps, 0.0, false}, opt);
    res.iekf_plain_objective.push_back(map_objective(prior, model, y, prior.mean));
    for (const auto& it : plain.trace.iterates) res.iekf_plain_objective.push_back(map_objective(prior, model, y, it.state));
    add_filter("iekf", std::move(plain));

    auto convergence_row = [&](const std::string& method, std::size_t n, const GaussianBelief& post) {
        ConvergenceRow row;
        row.method = method;
        row.steps = n;
        row.mean = post.mean;
        row.distance_to_map = (post.mean - res.map).norm();
        const auto axes = covariance_axes(post.cov, oracle_minor);
        row.sigma1 = axes.first;
        row.sigma2e2 = axes.second;
        row.sigma2e2_difference = (oracle_minor - axes.second).norm();
        res.convergence.push_back(row);
    };
    UpdateOptions quiet;
    quiet.record_trace = false;
    for (std::size_t n : s.convergence_steps) {
        if (n == 0) continue;
        convergence_row("bruf", n, bruf_update(prior, model, y, StepSchedule::uniform(n), quiet).posterior);
        convergence_row("vs_bruf", n, bruf_update(prior, model, y, StepSchedule::variable(n), quiet).posterior);
        convergence_row("iekf_ls", n, iekf_update(prior, model, y, {n, 0.0, true}, quiet).posterior);
        convergence_row("ec_bruf", n,
                        ec_bruf_update(prior, model, y, range_controller(s.ec_tol, n), quiet).posterior);
    }
    convergence_row("oracle", 0, {res.oracle_mean, res.oracle_cov});

    // Ensembles share one prior draw; each filter gets its own stream.
    Rng prior_rng = Rng::derive(s.seed, {0});
    res.prior_ensemble = sample_ensemble(prior, s.members, prior_rng);
    const HdrMask hdr = hdr_mask(res.grid, s.hdr_mass);
    auto add_ensemble = [&](const std::string& name, EnsembleResult r) {
        RangeEnsembleRun run{name, std::move(r.ensemble), std::move(r.trace), 0.0, 0.0};
        std::size_t ring = 0, inside = 0;
        for (Eigen::Index j = 0; j < run.final_ensemble.size(); ++j) {
            const Vector x = run.final_ensemble.member(j);
            if (std::abs(x.norm() - s.scenario.observed) < s.ring_band) ++ring;
            if (hdr.contains(x)) ++inside;
        }
        const auto m = static_cast<double>(run.final_ensemble.size());
        run.ring_fraction = static_cast<double>(ring) / m;
        run.hdr_fraction = static_cast<double>(inside) / m;
        res.ensembles.push_back(std::move(run));
    };
    {
        Rng rng = Rng::derive(s.seed, {1});
        EnsembleUpdateConfig cfg;
        cfg.inflation = s.ensemble_inflation;
        cfg.keep_snapshots = true;
        add_ensemble("enkf", bruenkf_update(res.prior_ensemble, model, y, cfg, rng));
    }
    {
        Rng rng = Rng::derive(s.seed, {2});
        EnsembleUpdateConfig cfg;
        cfg.schedule = StepSchedule::uniform(s.ensemble_steps);
        cfg.inflation = s.ensemble_inflation;
        cfg.keep_snapshots = true;
        add_ensemble("bruenkf", bruenkf_update(res.prior_ensemble, model, y, cfg, rng));
    }
    {
        Rng rng = Rng::derive(s.seed, {3});
        EnsembleUpdateConfig cfg;
        cfg.schedule = StepSchedule::variable(s.ensemble_steps);
        cfg.inflation = s.ensemble_inflation;
        cfg.keep_snapshots = true;
        add_ensemble("vs_bruenkf", bruenkf_update(res.prior_ensemble, model, y, cfg, rng));
    }
    {
        Rng rng = Rng::derive(s.seed, {4});
        EcEnsembleConfig cfg;
        cfg.controller = range_controller(s.ensemble_ec_tol, s.ensemble_steps);
        cfg.inflation = s.ensemble_inflation;
        add_ensemble("ec_bruenkf", ec_bruenkf_update(res.prior_ensemble, model, y, cfg, rng));
    }
    return res;
}

void write_range_demo(const RangeDemoResult& res, const RangeDemoSettings& s, OutputDir& out) {
    const auto f = [](double v) { return format_double(v); };
    {
        std::ostringstream csv;
        csv << "filter,iteration,t,x,y,p11,p12,p22\n";
        for (const auto& run : res.filters) {
            const GaussianBelief& p = s.scenario.prior;
            csv << run.name << ",0,0," << f(p.mean(0)) << ',' << f(p.mean(1)) << ',' << f(p.cov(0, 0)) << ','
                << f(p.cov(0, 1)) << ',' << f(p.cov(1, 1)) << '\n';
            std::size_t i = 0;
            for (const auto& it : run.trace.iterates) {
                csv << run.name << ',' << ++i << ',' << f(it.t) << ',' << f(it.state(0)) << ',' << f(it.state(1))
                    << ',' << f(it.cov(0, 0)) << ',' << f(it.cov(0, 1)) << ',' << f(it.cov(1, 1)) << '\n';
            }
        }
        out.write("range_traces.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "filter,accepted_steps,rejected_steps,x,y,distance_to_map\n";
        for (const auto& run : res.filters) {
            csv << run.name << ',' << run.trace.accepted_steps << ',' << run.trace.rejected_steps << ','
                << f(run.posterior.mean(0)) << ',' << f(run.posterior.mean(1)) << ',' << f(run.distance_to_map)
                << '\n';
        }
        out.write("range_summary.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "quantity,value\n";
        csv << "map_x," << f(res.map(0)) << "\nmap_y," << f(res.map(1)) << '\n';
        csv << "mean_x," << f(res.oracle_mean(0)) << "\nmean_y," << f(res.oracle_mean(1)) << '\n';
        csv << "cov_xx," << f(res.oracle_cov(0, 0)) << "\ncov_xy," << f(res.oracle_cov(0, 1)) << "\ncov_yy,"
            << f(res.oracle_cov(1, 1)) << '\n';
        csv << "mass," << f(res.grid.total_mass()) << "\nresolution," << res.grid.resolution << '\n';
        out.write("range_oracle.csv", csv.str());
    }
    {
        const MeasurementModel model = range_model(s.scenario.noise_var);
        const GridPosterior coarse =
            grid_posterior(s.scenario.prior, model, s.scenario.measurement(), s.bounds, s.export_resolution);
        std::ostringstream csv;
        csv << "x,y,density\n";
        for (Eigen::Index r = 0; r < coarse.resolution; ++r)
            for (Eigen::Index c = 0; c < coarse.resolution; ++c)
                csv << f(coarse.x(c)) << ',' << f(coarse.y(r)) << ',' << f(coarse.density(r, c)) << '\n';
        out.write("range_grid.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "method,N,x,y,distance_to_map,sigma1,sigma2e2_x,sigma2e2_y,sigma2e2_difference\n";
        for (const auto& r : res.convergence) {
            csv << r.method << ',' << r.steps << ',' << f(r.mean(0)) << ',' << f(r.mean(1)) << ','
                << f(r.distance_to_map) << ',' << f(r.sigma1) << ',' << f(r.sigma2e2(0)) << ','
                << f(r.sigma2e2(1)) << ',' << f(r.sigma2e2_difference) << '\n';
        }
        out.write("range_convergence.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "filter,step,t,member,x,y\n";
        auto dump = [&](const std::string& name, std::size_t step, double t, const Ensemble& e) {
            for (Eigen::Index j = 0; j < e.size(); ++j)
                csv << name << ',' << step << ',' << f(t) << ',' << j << ',' << f(e.members()(0, j)) << ','
                    << f(e.members()(1, j)) << '\n';
        };
        dump("prior", 0, 0.0, res.prior_ensemble);
        for (const auto& run : res.ensembles) {
            const std::size_t last = run.trace.times.size();
            for (std::size_t k = 0; k < run.trace.snapshots.size(); ++k) {
                const std::size_t step = k + 1;
                if (step != last && std::find(s.snapshot_steps.begin(), s.snapshot_steps.end(), step) ==
                                        s.snapshot_steps.end())
                    continue;
                dump(run.name, step, run.trace.times[k], run.trace.snapshots[k]);
            }
            if (run.trace.snapshots.empty()) dump(run.name, last, 1.0, run.final_ensemble);
        }
        out.write("range_ensembles.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "filter,members,accepted_steps,rejected_steps,ring_fraction,hdr_fraction\n";
        for (const auto& run : res.ensembles) {
            csv << run.name << ',' << run.final_ensemble.size() << ',' << run.trace.accepted_steps << ','
                << run.trace.rejected_steps << ',' << f(run.ring_fraction) << ',' << f(run.hdr_fraction) << '\n';
        }
        out.write("range_ensemble_summary.csv", csv.str());
    }
}

}  // namespace bruf::harness
