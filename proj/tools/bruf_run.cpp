// Experiment runner: bruf-run <subcommand> --config PATH [--seed U64] [--out DIR] [--threads N]

#include "bruf/errors.hpp"
#include "bruf/harness/config.hpp"
#include "bruf/harness/lorenz96_campaign.hpp"
#include "bruf/harness/output.hpp"
#include "bruf/harness/range_demo.hpp"
#include "bruf/harness/theorem_check.hpp"
#include "bruf/harness/tracking_campaign.hpp"
#include "bruf/metrics.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

using namespace bruf;
using namespace bruf::harness;

namespace {

enum ExitCode { kOk = 0, kThreshold = 1, kConfig = 2, kAllDiverged = 3, kRuntime = 4 };

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::size_t threads = 0;
};

Config load_config(const Common& c) {
    Config cfg = Config::load(c.config_path);
    if (c.seed) cfg.set("seed", std::to_string(*c.seed));
    return cfg;
}

int theorem_check(const Common& c) {
    const Config cfg = load_config(c);
    const TheoremCheckSettings s = theorem_settings(cfg);
    cfg.require_all_read();
    const TheoremReport report = run_theorem_check(s);
    OutputDir out(c.out_dir);
    write_theorem_report(report, out);
    out.write_manifest("theorem-check", cfg, s.seed);
    std::cout << "theorem-check: " << report.rows.size() << " rows, max deviation "
              << format_double(report.max_deviation) << " (tolerance " << format_double(s.tolerance) << ") "
              << (report.passed ? "PASS" : "FAIL") << '\n';
    return report.passed ? kOk : kThreshold;
}

int range_demo(const Common& c) {
    const Config cfg = load_config(c);
    const RangeDemoSettings s = range_settings(cfg);
    cfg.require_all_read();
    const RangeDemoResult res = run_range_demo(s);
    OutputDir out(c.out_dir);
    write_range_demo(res, s, out);
    out.write_manifest("range-demo", cfg, s.seed);
    std::cout << "range-demo: oracle MAP (" << format_double(res.map(0)) << ", " << format_double(res.map(1))
              << ")\n";
    for (const auto& f : res.filters)
        std::cout << "  " << f.name << ": distance to MAP " << format_double(f.distance_to_map) << ", "
                  << f.trace.accepted_steps << " steps\n";
    for (const auto& e : res.ensembles)
        std::cout << "  " << e.name << ": ring fraction " << format_double(e.ring_fraction) << ", HDR fraction "
                  << format_double(e.hdr_fraction) << '\n';
    return kOk;
}

int tracking(const Common& c) {
    const Config cfg = load_config(c);
    TrackingSettings s = tracking_settings(cfg);
    cfg.require_all_read();
    if (c.threads) s.threads = c.threads;
    const TrackingResult res = run_tracking(s);
    OutputDir out(c.out_dir);
    write_tracking(res, s, out);
    out.write_manifest("tracking", cfg, s.seed);
    bool all_diverged = false;
    for (const auto& f : res.filters) {
        std::cout << "  " << f.spec.name << ": position RMSE " << format_double(f.position_rmse / 1000.0)
                  << " km, mean SNEES " << format_double(f.mean_snees) << ", diverged " << f.diverged << '/'
                  << f.runs.size() << '\n';
        if (f.diverged == f.runs.size()) all_diverged = true;
    }
    return all_diverged ? kAllDiverged : kOk;
}

int lorenz96(const Common& c) {
    const Config cfg = load_config(c);
    Lorenz96Settings s = lorenz96_settings(cfg);
    cfg.require_all_read();
    if (c.threads) s.threads = c.threads;
    const Lorenz96Result res = run_lorenz96(s);
    OutputDir out(c.out_dir);
    write_lorenz96(res, s, out);
    out.write_manifest("lorenz96", cfg, s.seed);
    for (const auto& p : res.points)
        std::cout << "  " << p.filter << " " << p.sweep << " M=" << p.members << " gamma=" << format_double(p.gamma)
                  << ": mean RMSE " << format_double(p.mean_rmse) << '\n';
    return res.any_configuration_all_diverged() ? kAllDiverged : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive-update filter experiments"};
    app.require_subcommand(1);
    Common common;
    auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "Override the config seed");
        sub->add_option("--out", common.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", common.threads, "Worker threads (default: BRUF_THREADS or 1)");
        return sub;
    };
    CLI::App* theorem = add("theorem-check", "Recursive update vs single Kalman update on random linear problems");
    CLI::App* range = add("range-demo", "Range-only example with grid oracle");
    CLI::App* track = add("tracking", "Radar tracking Monte Carlo campaign");
    CLI::App* l96 = add("lorenz96", "Lorenz '96 ensemble campaign");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (theorem->parsed()) return theorem_check(common);
        if (range->parsed()) return range_demo(common);
        if (track->parsed()) return tracking(common);
        if (l96->parsed()) return lorenz96(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kConfig;
}
