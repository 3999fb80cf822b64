#include "bruf/harness/theorem_check.hpp"

#include "bruf/metrics.hpp"
#include "bruf/numeric.hpp"
#include "bruf/random.hpp"
#include "bruf/recursive_update.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace bruf::harness {

TheoremCheckSettings theorem_settings(const Config& config) {
    TheoremCheckSettings s;
    s.seed = config.get_u64("seed", s.seed);
    s.problems = config.get_size("theorem.problems", s.problems);
    s.steps = config.get_sizes("theorem.steps", s.steps);
    s.custom_schedules = config.get_size("theorem.custom_schedules", s.custom_schedules);
    s.max_state_dim = config.get_size("theorem.max_state_dim", s.max_state_dim);
    s.max_meas_dim = config.get_size("theorem.max_meas_dim", s.max_meas_dim);
    s.tolerance = config.get_double("theorem.tolerance", s.tolerance);
    s.schedule_sum = config.get_double("theorem.schedule_sum", s.schedule_sum);
    if (s.max_state_dim == 0 || s.max_meas_dim == 0) throw ConfigError("theorem: dimensions must be positive");
    for (std::size_t n : s.steps)
        if (n == 0) throw ConfigError("theorem.steps: N must be positive");
    if (!(s.schedule_sum > 0.0)) throw ConfigError("theorem.schedule_sum must be positive");
    return s;
}

namespace {

Matrix random_spd(Eigen::Index n, Rng& rng) {
    const Matrix a = rng.standard_normal(n, n);
    return symmetrized(a * a.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n));
}

std::size_t draw_index(Rng& rng, std::size_t max) {
    return 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max)) % max;
}

struct Deviation {
    double state = 0.0;
    double cov = 0.0;
};

Deviation compare(const LinearProblem& pb, const StepSchedule& schedule) {
    const MeasurementModel model = MeasurementModel::linear(pb.h, pb.noise_cov);
    const GaussianBelief prior{pb.prior_mean, pb.prior_cov};
    const GaussianBelief kalman = kalman_update(prior, model, pb.y);
    UpdateOptions opt;
    opt.record_trace = false;
    const GaussianBelief rec = bruf_update(prior, model, pb.y, schedule, opt).posterior;
    return {(rec.mean - kalman.mean).norm() / (1.0 + kalman.mean.norm()),
            (rec.cov - kalman.cov).norm() / kalman.cov.norm()};
}

}  // namespace

LinearProblem random_linear_problem(std::uint64_t seed, std::size_t max_n, std::size_t max_m) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(draw_index(rng, max_n));
    const auto m = static_cast<Eigen::Index>(draw_index(rng, max_m));
    LinearProblem pb;
    pb.prior_mean = rng.standard_normal(n);
    pb.prior_cov = random_spd(n, rng);
    pb.h = rng.standard_normal(m, n);
    pb.noise_cov = random_spd(m, rng);
    pb.y = pb.h * pb.prior_mean + rng.standard_normal(m);
    return pb;
}

TheoremReport run_theorem_check(const TheoremCheckSettings& settings) {
    using Key = std::tuple<std::size_t, std::size_t, std::string, std::size_t>;
    std::map<Key, TheoremRow> rows;
    TheoremReport report;
    report.tolerance = settings.tolerance;

    auto record = [&](const LinearProblem& pb, const std::string& kind, const StepSchedule& schedule) {
        const Deviation d = compare(pb, schedule);
        const auto n = static_cast<std::size_t>(pb.prior_mean.size());
        const auto m = static_cast<std::size_t>(pb.y.size());
        TheoremRow& row = rows[{n, m, kind, schedule.steps()}];
        row.n = n;
        row.m = m;
        row.schedule = kind;
        row.steps = schedule.steps();
        ++row.instances;
        row.max_state_dev = std::max(row.max_state_dev, d.state);
        row.max_cov_dev = std::max(row.max_cov_dev, d.cov);
        const double worst = std::max(d.state, d.cov);
        if (worst > report.worst.deviation || report.worst.schedule.empty()) {
            report.worst = {worst, kind, {schedule.coefficients().begin(), schedule.coefficients().end()}, pb};
        }
    };

    const Rng root(settings.seed);
    for (std::size_t i = 0; i < settings.problems; ++i) {
        const LinearProblem pb =
            random_linear_problem(root.split(i).seed(), settings.max_state_dim, settings.max_meas_dim);
        for (std::size_t n : settings.steps) {
            record(pb, "uniform", StepSchedule::uniform(n));
            record(pb, "variable", StepSchedule::variable(n));
        }
    }
    const Rng custom_root = root.split(settings.problems + 1);
    for (std::size_t i = 0; i < settings.custom_schedules; ++i) {
        Rng rng = custom_root.split(i);
        const LinearProblem pb = random_linear_problem(rng.split(0).seed(), settings.max_state_dim, settings.max_meas_dim);
        const std::size_t steps = 2 + static_cast<std::size_t>(rng.uniform() * 19.0) % 19;
        std::vector<double> c(steps);
        for (double& v : c) v = 0.05 + rng.uniform();
        const double total = compensated_sum(c);
        for (double& v : c) v = v / total * settings.schedule_sum;
        const StepSchedule schedule =
            settings.schedule_sum == 1.0 ? StepSchedule::custom(c) : StepSchedule::unchecked(c);
        record(pb, "custom", schedule);
    }

    for (auto& [key, row] : rows) {
        report.max_deviation = std::max({report.max_deviation, row.max_state_dev, row.max_cov_dev});
        report.rows.push_back(row);
    }
    report.passed = report.max_deviation < settings.tolerance;
    return report;
}

namespace {

nlohmann::ordered_json matrix_json(const Matrix& a) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(a.cols()));
        for (Eigen::Index c = 0; c < a.cols(); ++c) row[static_cast<std::size_t>(c)] = a(r, c);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void write_theorem_report(const TheoremReport& report, OutputDir& out) {
    std::ostringstream csv;
    csv << "n,m,schedule,N,instances,max_state_dev,max_cov_dev\n";
    for (const TheoremRow& r : report.rows) {
        csv << r.n << ',' << r.m << ',' << r.schedule << ',' << r.steps << ',' << r.instances << ','
            << format_double(r.max_state_dev) << ',' << format_double(r.max_cov_dev) << '\n';
    }
    out.write("theorem_deviations.csv", csv.str());
    if (report.passed) return;

    nlohmann::ordered_json j;
    j["deviation"] = report.worst.deviation;
    j["tolerance"] = report.tolerance;
    j["schedule"] = report.worst.schedule;
    j["coefficients"] = report.worst.coefficients;
    const LinearProblem& pb = report.worst.problem;
    j["prior_mean"] = std::vector<double>(pb.prior_mean.data(), pb.prior_mean.data() + pb.prior_mean.size());
    j["prior_cov"] = matrix_json(pb.prior_cov);
    j["h"] = matrix_json(pb.h);
    j["noise_cov"] = matrix_json(pb.noise_cov);
    j["y"] = std::vector<double>(pb.y.data(), pb.y.data() + pb.y.size());
    out.write("theorem_worst_instance.json", j.dump(2) + "\n");
}

}  // namespace bruf::harness
