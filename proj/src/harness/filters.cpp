#include "bruf/harness/filters.hpp"

#include "bruf/errors.hpp"

#include <map>

namespace bruf::harness {

namespace {

const std::map<std::string, FilterKind>& kind_table() {
    static const std::map<std::string, FilterKind> table{
        {"ekf", FilterKind::ekf},       {"iekf", FilterKind::iekf},           {"bruf", FilterKind::bruf},
        {"vs_bruf", FilterKind::vs_bruf}, {"ec_bruf", FilterKind::ec_bruf},     {"enkf", FilterKind::enkf},
        {"bruenkf", FilterKind::bruenkf}, {"vs_bruenkf", FilterKind::vs_bruenkf},
        {"ec_bruenkf", FilterKind::ec_bruenkf}, {"gromov", FilterKind::gromov}};
    return table;
}

}  // namespace

FilterKind parse_filter_kind(const std::string& text) {
    const auto it = kind_table().find(text);
    if (it == kind_table().end()) throw ConfigError("unknown filter kind '" + text + "'");
    return it->second;
}

std::string to_string(FilterKind kind) {
    for (const auto& [k, v] : kind_table())
        if (v == kind) return k;
    return "?";
}

bool is_ensemble(FilterKind kind) {
    switch (kind) {
        case FilterKind::enkf:
        case FilterKind::bruenkf:
        case FilterKind::vs_bruenkf:
        case FilterKind::ec_bruenkf:
        case FilterKind::gromov:
            return true;
        default:
            return false;
    }
}

StepSchedule FilterSpec::schedule() const {
    switch (kind) {
        case FilterKind::vs_bruf:
        case FilterKind::vs_bruenkf:
            return StepSchedule::variable(steps);
        default:
            return StepSchedule::uniform(steps);
    }
}

long long FilterSpec::reported_steps() const {
    switch (kind) {
        case FilterKind::bruf:
        case FilterKind::vs_bruf:
        case FilterKind::bruenkf:
        case FilterKind::vs_bruenkf:
            return static_cast<long long>(steps);
        case FilterKind::gromov:
            return static_cast<long long>(gromov_steps);
        case FilterKind::iekf:
            return static_cast<long long>(iekf.max_iters);
        default:
            return -1;
    }
}

std::vector<FilterSpec> filters_from_config(const Config& config, const std::string& list_key) {
    std::vector<FilterSpec> out;
    for (const std::string& name : config.get_list(list_key)) {
        const std::string p = "filter." + name + ".";
        FilterSpec f;
        f.name = name;
        f.kind = parse_filter_kind(config.get_string(p + "kind"));
        f.steps = config.get_size(p + "steps", 1);
        if (f.steps == 0) throw ConfigError(p + "steps must be positive");
        f.controller.atol = config.get_double(p + "atol", f.controller.atol);
        f.controller.rtol = config.get_double(p + "rtol", f.controller.rtol);
        f.controller.safety = config.get_double(p + "safety", f.controller.safety);
        f.controller.min_factor = config.get_double(p + "min_factor", f.controller.min_factor);
        f.controller.max_factor = config.get_double(p + "max_factor", f.controller.max_factor);
        f.controller.initial_steps = config.get_size(p + "initial_steps", f.controller.initial_steps);
        f.controller.max_rejections = config.get_size(p + "max_rejections", f.controller.max_rejections);
        f.iekf.max_iters = config.get_size(p + "max_iters", f.iekf.max_iters);
        f.iekf.tol = config.get_double(p + "tol", f.iekf.tol);
        f.iekf.line_search = config.get_bool(p + "line_search", f.iekf.line_search);
        f.inflation = config.get_double(p + "inflation", f.inflation);
        f.perturb = config.get_bool(p + "perturb", f.perturb);
        f.joseph = config.get_bool(p + "joseph", f.joseph);
        f.gromov_steps = config.get_size(p + "gromov_steps", f.gromov_steps);
        f.companion_noise = config.get_double(p + "companion_noise", f.companion_noise);
        f.resample = config.get_bool(p + "resample", f.resample);
        f.recenter_companion = config.get_bool(p + "recenter_companion", f.recenter_companion);
        const std::string error_on = config.get_string(p + "error_on", "mean");
        if (error_on == "mean") f.ec_error_on = EcEnsembleConfig::ErrorOn::ensemble_mean;
        else if (error_on == "worst_member") f.ec_error_on = EcEnsembleConfig::ErrorOn::worst_member;
        else throw ConfigError(p + "error_on must be mean or worst_member");
        try {
            f.controller.validate();
        } catch (const EstimationError& e) {
            throw ConfigError(p + ": " + e.what());
        }
        if (!(f.inflation >= 1.0)) throw ConfigError(p + "inflation must be >= 1");
        out.push_back(std::move(f));
    }
    if (out.empty()) throw ConfigError("config: '" + list_key + "' names no filters");
    return out;
}

GaussianBelief apply_update(const FilterSpec& spec, const GaussianBelief& prior, const MeasurementModel& model,
                            const Vector& y, UpdateTrace* trace) {
    UpdateOptions options;
    options.joseph_form = spec.joseph;
    options.record_trace = trace != nullptr;
    RecursiveResult r;
    switch (spec.kind) {
        case FilterKind::ekf: {
            GaussianBelief post = kalman_update(prior, model, y, options);
            if (trace) {
                *trace = {};
                trace->iterates.push_back({1.0, post.mean, post.cov});
                trace->accepted_steps = 1;
            }
            return post;
        }
        case FilterKind::iekf:
            r = iekf_update(prior, model, y, spec.iekf, options);
            break;
        case FilterKind::bruf:
        case FilterKind::vs_bruf:
            r = bruf_update(prior, model, y, spec.schedule(), options);
            break;
        case FilterKind::ec_bruf:
            r = ec_bruf_update(prior, model, y, spec.controller, options);
            break;
        default:
            throw InvalidArgumentError("apply_update: '" + spec.name + "' is an ensemble filter");
    }
    if (trace) *trace = std::move(r.trace);
    return std::move(r.posterior);
}

EnsembleStepOutput apply_ensemble_update(const FilterSpec& spec, const Ensemble& ens, const MeasurementModel& model,
                                         const Vector& y, Rng& rng, bool keep_snapshots) {
    switch (spec.kind) {
        case FilterKind::enkf:
        case FilterKind::bruenkf:
        case FilterKind::vs_bruenkf: {
            EnsembleUpdateConfig cfg;
            cfg.schedule = spec.kind == FilterKind::enkf ? StepSchedule::uniform(1) : spec.schedule();
            cfg.inflation = spec.inflation;
            cfg.perturb_observations = spec.perturb;
            cfg.keep_snapshots = keep_snapshots;
            auto r = bruenkf_update(ens, model, y, cfg, rng);
            return {std::move(r.ensemble), std::move(r.trace)};
        }
        case FilterKind::ec_bruenkf: {
            EcEnsembleConfig cfg;
            cfg.controller = spec.controller;
            cfg.error_on = spec.ec_error_on;
            cfg.inflation = spec.inflation;
            cfg.perturb_observations = spec.perturb;
            cfg.keep_snapshots = keep_snapshots;
            auto r = ec_bruenkf_update(ens, model, y, cfg, rng);
            return {std::move(r.ensemble), std::move(r.trace)};
        }
        default:
            throw InvalidArgumentError("apply_ensemble_update: unsupported filter '" + spec.name + "'");
    }
}

}  // namespace bruf::harness
