// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fail.
// Default mode runs reduced Lorenz '96 sweeps; --full runs them at 10 runs per point.

#include "bruf/ensemble_update.hpp"
#include "bruf/grid_oracle.hpp"
#include "bruf/harness/lorenz96_campaign.hpp"
#include "bruf/harness/parallel.hpp"
#include "bruf/harness/range_demo.hpp"
#include "bruf/harness/theorem_check.hpp"
#include "bruf/harness/tracking_campaign.hpp"
#include "bruf/models/range.hpp"
#include "bruf/recursive_update.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace bruf;
using namespace bruf::harness;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* format, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Matrix random_spd(Eigen::Index n, Rng& rng) {
    const Matrix a = rng.standard_normal(n, n);
    return a * a.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n);
}

// ---------------------------------------------------------------- 1

void theorem_equivalence() {
    const auto start = Clock::now();
    TheoremCheckSettings s;  // 500 problems, N ∈ {1,2,3,5,10,20}, 100 custom schedules
    const auto report_ = run_theorem_check(s);
    const double secs = seconds_since(start);
    report("1 theorem-equivalence", report_.max_deviation < 1e-10 && secs < 10.0,
           fmt("max rel dev %.2e (< 1e-10), %.1f s (< 10 s)", report_.max_deviation, secs));
}

// ---------------------------------------------------------------- 2

// h_i(x) = sin(a_iᵀx) + ½(b_iᵀx)²
MeasurementModel random_nonlinear_model(Eigen::Index n, Eigen::Index m, Rng& rng) {
    const Matrix a = rng.standard_normal(m, n);
    const Matrix b = rng.standard_normal(m, n);
    MeasurementModel model;
    model.h = [a, b](const Vector& x) {
        const Vector ax = a * x;
        const Vector bx = b * x;
        return Vector(ax.array().sin() + 0.5 * bx.array().square());
    };
    model.jacobian = [a, b](const Vector& x) {
        const Vector ax = a * x;
        const Vector bx = b * x;
        return Matrix(ax.array().cos().matrix().asDiagonal() * a + bx.asDiagonal() * b);
    };
    model.noise_cov = random_spd(m, rng);
    return model;
}

void degeneracy() {
    const auto start = Clock::now();
    Rng rng(2);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 1 + trial % 6;
        const Eigen::Index m = 1 + trial % 4;
        const auto model = random_nonlinear_model(n, m, rng);
        const GaussianBelief prior{rng.standard_normal(n), random_spd(n, rng)};
        const Vector y = model.h(rng.standard_normal(n)) + rng.standard_normal(m);
        const auto ekf = kalman_update(prior, model, y);
        const auto same = [&](const GaussianBelief& b) { return b.mean == ekf.mean && b.cov == ekf.cov; };
        mismatches += !same(bruf_update(prior, model, y, StepSchedule::uniform(1)).posterior);
        mismatches += !same(bruf_update(prior, model, y, StepSchedule::variable(1)).posterior);
        mismatches += !same(iekf_update(prior, model, y, {1, 0.0, false}).posterior);
    }
    const double secs = seconds_since(start);
    report("2 degeneracy", mismatches == 0 && secs < 5.0,
           fmt("%d of 300 BRUF/VS-BRUF/IEKF N=1 results differ from EKF bitwise, %.2f s (< 5 s)", mismatches, secs));
}

// ---------------------------------------------------------------- 3, 4

void range_example() {
    const auto start = Clock::now();
    RangeDemoSettings s;
    s.steps = 25;
    s.ec_tol = 0.1;
    s.grid_resolution = 800;
    const auto r = run_range_demo(s);
    const double secs = seconds_since(start);

    std::ostringstream detail;
    bool pass = secs < 30.0;
    for (const auto& f : r.filters) {
        if (f.name != "bruf" && f.name != "vs_bruf" && f.name != "ec_bruf" && f.name != "iekf_ls") continue;
        pass = pass && f.distance_to_map < 0.05;
        detail << f.name << ' ' << fmt("%.4f", f.distance_to_map) << ", ";
    }
    double worst_at_10 = 0.0;
    for (const auto& row : r.convergence)
        if (row.steps == 10 && row.method != "oracle") worst_at_10 = std::max(worst_at_10, row.distance_to_map);
    pass = pass && worst_at_10 < 0.05;
    detail << fmt("worst at N=10 %.4f (< 0.05), %.1f s (< 30 s)", worst_at_10, secs);
    report("3 range-map-convergence", pass, detail.str());

    std::size_t steps = 0;
    for (const auto& f : r.filters)
        if (f.name == "ec_bruf") steps = f.trace.accepted_steps;
    report("4 ec-bruf-step-count", steps >= 7 && steps <= 13, fmt("%zu accepted steps (10 ± 3)", steps));
}

// ---------------------------------------------------------------- 5, 6

void tracking() {
    const auto start = Clock::now();
    TrackingSettings s;
    s.seed = 11;
    s.runs = 100;
    s.filters = default_tracking_filters();
    s.threads = resolve_threads(0);
    const auto r = run_tracking(s);
    const double secs = seconds_since(start);
    // Fallback gate if 100 runs blow the time budget.
    const double tol = secs > 600.0 ? 0.3 : 0.2;

    const std::vector<std::pair<std::string, double>> table{{"BRUF10", 0.87}, {"BRUF25", 0.71}, {"VS-BRUF10", 0.65},
                                                            {"VS-BRUF25", 0.60}, {"EC-BRUF", 0.59}, {"IEKF", 0.59}};
    std::map<std::string, double> km;
    bool pass = true;
    std::ostringstream detail;
    for (const auto& [name, expected] : table) {
        km[name] = r.by_name(name).position_rmse / 1000.0;
        const bool ok = std::abs(km[name] - expected) <= tol * expected;
        pass = pass && ok;
        detail << name << ' ' << fmt("%.3f", km[name]) << (ok ? "" : "(!)") << ", ";
    }
    const bool ordered = km["BRUF10"] > km["BRUF25"] && km["BRUF25"] > km["VS-BRUF10"] &&
                         km["VS-BRUF10"] > km["VS-BRUF25"] && km["VS-BRUF25"] >= km["IEKF"];
    detail << fmt("km within ±%.0f%%; ordering %s; %.1f s", tol * 100.0, ordered ? "holds" : "broken", secs);
    report("5 tracking-rmse", pass && ordered, detail.str());

    std::ostringstream snees_detail;
    bool snees_pass = true;
    for (const char* name : {"IEKF", "VS-BRUF25", "EC-BRUF"}) {
        const double v = r.by_name(name).mean_snees;
        const bool ok = v >= 0.5 && v <= 1.5;
        snees_pass = snees_pass && ok;
        snees_detail << name << ' ' << fmt("%.3f", v) << (ok ? "" : "(!)") << ", ";
    }
    const double bruf10 = r.by_name("BRUF10").mean_snees;
    const double vs25 = r.by_name("VS-BRUF25").mean_snees;
    const bool less_consistent = std::abs(bruf10 - 1.0) > std::abs(vs25 - 1.0);
    snees_detail << fmt("in [0.5, 1.5]; BRUF10 %.3f farther from 1 than VS-BRUF25: %s", bruf10,
                        less_consistent ? "yes" : "no");
    report("6 tracking-snees", snees_pass && less_consistent, snees_detail.str());
}

// ---------------------------------------------------------------- 7, 8

std::vector<FilterSpec> l96_filters(std::initializer_list<const char*> names) {
    std::vector<FilterSpec> out;
    for (const auto& f : default_lorenz96_filters())
        for (const char* n : names)
            if (f.name == n) out.push_back(f);
    return out;
}

Lorenz96Settings l96_base(std::size_t runs) {
    Lorenz96Settings s;
    s.seed = 3;
    s.runs = runs;
    s.threads = resolve_threads(0);
    return s;
}

std::string m_text(std::size_t m) { return m == 0 ? std::string("none") : std::to_string(m); }

void lorenz96_convergence(bool full) {
    const auto start = Clock::now();
    auto s = l96_base(full ? 10 : 3);
    s.filters = l96_filters({"EnKF", "BRUEnKF", "VS-BRUEnKF", "EC-BRUEnKF"});
    s.members = full ? std::vector<std::size_t>{10, 15, 20, 25, 30, 35, 40} : std::vector<std::size_t>{25, 30, 35};
    const auto r = run_lorenz96(s);

    // Not converging anywhere on the grid ranks last.
    const auto rank = [&](const char* name) {
        const std::size_t m = r.min_converging_members(name, s.convergence_threshold);
        return m == 0 ? std::numeric_limits<std::size_t>::max() : m;
    };
    const std::size_t ec = rank("EC-BRUEnKF"), bru = rank("BRUEnKF"), vs = rank("VS-BRUEnKF"), enkf = rank("EnKF");
    const bool ordered = ec <= bru && ec <= vs && bru <= enkf && vs <= enkf;
    bool pass = ordered && r.min_converging_members("EC-BRUEnKF", s.convergence_threshold) != 0;
    std::ostringstream detail;
    const auto m_of = [&](const char* name) { return m_text(r.min_converging_members(name, s.convergence_threshold)); };
    detail << "min M: EC " << m_of("EC-BRUEnKF") << ", BRU " << m_of("BRUEnKF") << ", VS " << m_of("VS-BRUEnKF")
           << ", EnKF " << m_of("EnKF") << "; ordering " << (ordered ? "holds" : "broken");
    if (full) {
        const std::vector<std::pair<const char*, std::size_t>> expected{
            {"EC-BRUEnKF", 25}, {"BRUEnKF", 30}, {"VS-BRUEnKF", 30}, {"EnKF", 35}};
        bool near = true;
        for (const auto& [name, m] : expected) {
            const std::size_t got = r.min_converging_members(name, s.convergence_threshold);
            near = near && got != 0 && (got > m ? got - m : m - got) <= 5;
        }
        pass = pass && near;
        detail << "; within one step of {25,30,30,35}: " << (near ? "yes" : "no");
    }

    auto g = l96_base(full ? 10 : 3);
    g.filters = l96_filters({"Gromov"});
    g.members = {10};
    const auto gr = run_lorenz96(g);
    const double gromov = gr.point("Gromov", "M", 10, g.scenario.gamma).mean_rmse;
    pass = pass && gromov < s.convergence_threshold;
    const double secs = seconds_since(start);
    if (!full) pass = pass && secs < 300.0;
    detail << fmt("; Gromov M=10 RMSE %.3f (< %.1f); %d runs/point; %.0f s", gromov, s.convergence_threshold,
                  static_cast<int>(s.runs), secs);
    report(full ? "7 l96-convergence (full)" : "7 l96-convergence (reduced)", pass, detail.str());
}

double run_stderr(const L96Point& p) {
    const double n = static_cast<double>(p.run_rmse.size());
    if (n < 2) return 0.0;
    double var = 0.0;
    for (double v : p.run_rmse) var += (v - p.mean_rmse) * (v - p.mean_rmse);
    return std::sqrt(var / (n - 1.0) / n);
}

void lorenz96_gamma(bool full) {
    const auto start = Clock::now();
    auto s = l96_base(full ? 10 : 2);
    s.filters = default_lorenz96_filters();
    s.m_sweep = false;
    s.gamma_sweep_members = 25;
    s.gammas = full ? std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9} : std::vector<double>{3, 5, 7};
    const auto r = run_lorenz96(s);

    bool enkf_worst = true;
    std::ostringstream detail;
    for (double gamma : s.gammas) {
        if (gamma < 3.0) continue;
        const double enkf = r.point("EnKF", "gamma", 25, gamma).mean_rmse;
        for (const auto& f : s.filters)
            if (f.name != "EnKF") enkf_worst = enkf_worst && enkf > r.point(f.name, "gamma", 25, gamma).mean_rmse;
    }
    // Non-decreasing up to twice the combined standard error of the two means.
    bool trend = true;
    for (const char* name : {"BRUEnKF", "VS-BRUEnKF", "EC-BRUEnKF"}) {
        detail << name << ' ';
        for (std::size_t i = 0; i < s.gammas.size(); ++i) {
            const auto& p = r.point(name, "gamma", 25, s.gammas[i]);
            detail << fmt(i == 0 ? "%.3f" : "/%.3f", p.mean_rmse);
            if (i == 0) continue;
            const auto& prev = r.point(name, "gamma", 25, s.gammas[i - 1]);
            const double noise = 2.0 * std::hypot(run_stderr(p), run_stderr(prev));
            if (!(p.mean_rmse >= prev.mean_rmse - noise)) trend = trend && std::isinf(p.mean_rmse);
        }
        detail << ", ";
    }
    const double secs = seconds_since(start);
    detail << "EnKF ";
    for (double gamma : s.gammas) detail << fmt("/%.3f", r.point("EnKF", "gamma", 25, gamma).mean_rmse);
    detail << fmt("; EnKF worst for γ≥3: %s; trend: %s; %d runs/point; %.0f s", enkf_worst ? "yes" : "no",
                  trend ? "holds" : "broken", static_cast<int>(s.runs), secs);
    report(full ? "8 l96-gamma-trend (full)" : "8 l96-gamma-trend (reduced)", enkf_worst && trend, detail.str());
}

// ---------------------------------------------------------------- 9

void ensemble_oracle() {
    Rng rng(9);
    double dev_enkf = 0.0, dev_bru = 0.0, dev_vs = 0.0, dev_ec = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 2 + trial % 5;
        const Eigen::Index m = 1 + trial % 3;
        const auto model = MeasurementModel::linear(rng.standard_normal(m, n), random_spd(m, rng));
        const Ensemble ens(rng.standard_normal(n, 20));
        const Vector y = rng.standard_normal(m);
        const auto ref = kalman_update({empirical_mean(ens), empirical_cov(ens)}, model, y);
        const auto dev = [&](const Ensemble& out) {
            return (empirical_mean(out) - ref.mean).norm() / (1.0 + ref.mean.norm());
        };
        Rng unused(0);
        dev_enkf = std::max(dev_enkf, dev(enkf_update(ens, model, y, 1.0, unused, false)));
        EnsembleUpdateConfig cfg;
        cfg.perturb_observations = false;
        cfg.schedule = StepSchedule::uniform(25);
        dev_bru = std::max(dev_bru, dev(bruenkf_update(ens, model, y, cfg, unused).ensemble));
        cfg.schedule = StepSchedule::variable(25);
        dev_vs = std::max(dev_vs, dev(bruenkf_update(ens, model, y, cfg, unused).ensemble));
        EcEnsembleConfig ec;
        ec.perturb_observations = false;
        dev_ec = std::max(dev_ec, dev(ec_bruenkf_update(ens, model, y, ec, unused).ensemble));
    }
    report("9a enkf-mean-vs-kalman", dev_enkf < 1e-9, fmt("max rel dev %.2e (< 1e-9)", dev_enkf));
    report("9b bruenkf25-mean-vs-kalman", dev_bru < 1e-9, fmt("max rel dev %.2e (< 1e-9)", dev_bru));
    report("9c vs-bruenkf25-mean-vs-kalman", dev_vs < 1e-9, fmt("max rel dev %.2e (< 1e-9)", dev_vs));
    report("9d ec-bruenkf-mean-vs-kalman", dev_ec < 1e-9, fmt("max rel dev %.2e (< 1e-9)", dev_ec));

    // BRUEnKF(1) against EnKF with equal seeds, perturbed, nonlinear range model.
    int differ = 0;
    RangeScenario sc;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng draw(seed);
        const Ensemble prior = sample_ensemble(sc.prior, 50, draw);
        Rng a(seed + 100), b(seed + 100);
        EnsembleUpdateConfig cfg;
        cfg.inflation = 1.06;
        const Ensemble lhs = bruenkf_update(prior, range_model(sc.noise_var), sc.measurement(), cfg, a).ensemble;
        const Ensemble rhs = enkf_update(prior, range_model(sc.noise_var), sc.measurement(), 1.06, b);
        differ += !(lhs == rhs);
    }
    report("9e bruenkf1-equals-enkf", differ == 0, fmt("%d of 20 seeded updates differ bitwise", differ));
}

// ---------------------------------------------------------------- 10

void oracle_consistency() {
    RangeScenario sc;
    const auto model = range_model(sc.noise_var);
    const auto grid = grid_posterior(sc.prior, model, sc.measurement(), GridBounds{}, 800);
    const auto fine = grid_posterior(sc.prior, model, sc.measurement(), GridBounds{}, 1600);

    const GaussianBelief prior{Vector{{0.5, -0.3}}, Matrix{{1.0, 0.3}, {0.3, 0.8}}};
    const auto linear = MeasurementModel::linear(Matrix::Identity(2, 2), Matrix{{0.5, 0.0}, {0.0, 0.4}});
    const Vector y{{1.0, 0.2}};
    const auto conj = grid_posterior(prior, linear, y, GridBounds{-6.0, 6.0, -6.0, 6.0}, 800);
    const double mean_err = (conj.mean() - kalman_update(prior, linear, y).mean).norm();

    const double mass_err = std::max({std::abs(grid.total_mass() - 1.0), std::abs(fine.total_mass() - 1.0),
                                      std::abs(conj.total_mass() - 1.0)});
    const double map_shift = (map_of(grid) - map_of(fine)).norm();
    const double half_cell = 0.5 * std::max(grid.dx, grid.dy);
    report("10 oracle-self-consistency", mass_err <= 1e-6 && mean_err < 1e-3 && map_shift < half_cell,
           fmt("|mass-1| %.1e (<= 1e-6), conjugate mean err %.1e (< 1e-3), MAP shift 800->1600 %.4f (< %.4f)",
               mass_err, mean_err, map_shift, half_cell));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance gate"};
    bool full = false;
    app.add_flag("--full", full, "Lorenz '96 sweeps at 10 runs per point over the whole grid");
    CLI11_PARSE(app, argc, argv);

    try {
        theorem_equivalence();
        degeneracy();
        range_example();
        tracking();
        lorenz96_convergence(full);
        lorenz96_gamma(full);
        ensemble_oracle();
        oracle_consistency();
    } catch (const std::exception& e) {
        std::printf("FAIL  aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
