#include "bruf/grid_oracle.hpp"

#include "bruf/errors.hpp"
#include "bruf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace bruf {

double GridPosterior::weight(Eigen::Index row, Eigen::Index col) const {
    const Eigen::Index last = resolution - 1;
    double w = cell_area();
    if (row == 0 || row == last) w *= 0.5;
    if (col == 0 || col == last) w *= 0.5;
    return w;
}

double GridPosterior::total_mass() const {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(density.size()));
    for (Eigen::Index r = 0; r < resolution; ++r)
        for (Eigen::Index c = 0; c < resolution; ++c) terms.push_back(density(r, c) * weight(r, c));
    return pairwise_sum(terms);
}

Vector GridPosterior::mean() const {
    std::vector<double> mx, my;
    for (Eigen::Index r = 0; r < resolution; ++r) {
        for (Eigen::Index c = 0; c < resolution; ++c) {
            const double w = density(r, c) * weight(r, c);
            mx.push_back(w * x(c));
            my.push_back(w * y(r));
        }
    }
    return Vector{{pairwise_sum(mx), pairwise_sum(my)}};
}

Matrix GridPosterior::covariance() const {
    const Vector m = mean();
    std::vector<double> sxx, sxy, syy;
    for (Eigen::Index r = 0; r < resolution; ++r) {
        for (Eigen::Index c = 0; c < resolution; ++c) {
            const double w = density(r, c) * weight(r, c);
            const double ex = x(c) - m(0), ey = y(r) - m(1);
            sxx.push_back(w * ex * ex);
            sxy.push_back(w * ex * ey);
            syy.push_back(w * ey * ey);
        }
    }
    const double cxy = pairwise_sum(sxy);
    return Matrix{{pairwise_sum(sxx), cxy}, {cxy, pairwise_sum(syy)}};
}

std::pair<Eigen::Index, Eigen::Index> GridPosterior::nearest(const Vector& p) const {
    auto clamp_index = [this](double v) {
        const auto i = static_cast<Eigen::Index>(std::llround(v));
        return std::clamp<Eigen::Index>(i, 0, resolution - 1);
    };
    return {clamp_index((p(1) - bounds.y_min) / dy), clamp_index((p(0) - bounds.x_min) / dx)};
}

GridPosterior grid_posterior(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                             const GridBounds& bounds, Eigen::Index resolution) {
    if (prior.dim() != 2) throw DimensionError("grid_posterior: state must be 2-D");
    if (resolution < 100) throw InvalidArgumentError("grid_posterior: resolution must be >= 100 per axis");
    if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min))
        throw InvalidArgumentError("grid_posterior: empty bounds");

    GridPosterior grid;
    grid.bounds = bounds;
    grid.resolution = resolution;
    grid.dx = (bounds.x_max - bounds.x_min) / static_cast<double>(resolution - 1);
    grid.dy = (bounds.y_max - bounds.y_min) / static_cast<double>(resolution - 1);

    const SpdFactor prior_factor(prior.cov);
    const SpdFactor noise_factor(model.noise_cov);
    Matrix log_density(resolution, resolution);
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < resolution; ++r) {
        for (Eigen::Index c = 0; c < resolution; ++c) {
            const Vector x{{grid.x(c), grid.y(r)}};
            const Vector dx = x - prior.mean;
            const Vector innov = y - model.h(x);
            const double v = -0.5 * (dx.dot(prior_factor.solve(dx)) + innov.dot(noise_factor.solve(innov)));
            log_density(r, c) = v;
            peak = std::max(peak, v);
        }
    }
    if (!std::isfinite(peak)) throw NumericalUnderflowError("grid_posterior: no finite log density on the grid");
    grid.density = (log_density.array() - peak).exp().matrix();
    const double mass = grid.total_mass();
    if (!(mass > 0.0)) throw NumericalUnderflowError("grid_posterior: unnormalized mass is zero");
    grid.density /= mass;
    return grid;
}

Vector map_of(const GridPosterior& grid) {
    Eigen::Index best_r = 0, best_c = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < grid.resolution; ++r) {
        for (Eigen::Index c = 0; c < grid.resolution; ++c) {
            if (grid.density(r, c) > best) {
                best = grid.density(r, c);
                best_r = r;
                best_c = c;
            }
        }
    }
    Vector node{{grid.x(best_c), grid.y(best_r)}};
    // The range posterior is a thin curved ridge; the best node can sit a
    // cell or more along it from the true peak, so take one Newton step on
    // log density from central differences over the 3x3 neighbourhood.
    const Eigen::Index r = best_r, c = best_c;
    if (r == 0 || c == 0 || r + 1 == grid.resolution || c + 1 == grid.resolution) return node;
    const auto l = [&](Eigen::Index i, Eigen::Index j) { return std::log(grid.density(i, j)); };
    for (Eigen::Index i = r - 1; i <= r + 1; ++i)
        for (Eigen::Index j = c - 1; j <= c + 1; ++j)
            if (!(grid.density(i, j) > 0.0)) return node;
    const double gx = (l(r, c + 1) - l(r, c - 1)) / (2.0 * grid.dx);
    const double gy = (l(r + 1, c) - l(r - 1, c)) / (2.0 * grid.dy);
    const double hxx = (l(r, c + 1) - 2.0 * l(r, c) + l(r, c - 1)) / (grid.dx * grid.dx);
    const double hyy = (l(r + 1, c) - 2.0 * l(r, c) + l(r - 1, c)) / (grid.dy * grid.dy);
    const double hxy = (l(r + 1, c + 1) - l(r + 1, c - 1) - l(r - 1, c + 1) + l(r - 1, c - 1)) / (4.0 * grid.dx * grid.dy);
    const double det = hxx * hyy - hxy * hxy;
    if (!(hxx < 0.0 && det > 0.0)) return node;
    const double step_x = -(hyy * gx - hxy * gy) / det;
    const double step_y = -(hxx * gy - hxy * gx) / det;
    if (std::abs(step_x) > grid.dx || std::abs(step_y) > grid.dy) return node;
    return Vector{{node(0) + step_x, node(1) + step_y}};
}

bool HdrMask::contains(const Vector& p) const {
    const auto [r, c] = grid->nearest(p);
    if (p(0) < grid->bounds.x_min || p(0) > grid->bounds.x_max) return false;
    if (p(1) < grid->bounds.y_min || p(1) > grid->bounds.y_max) return false;
    return inside(r, c);
}

HdrMask hdr_mask(const GridPosterior& grid, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) throw InvalidArgumentError("hdr_mask: mass must lie in (0, 1)");
    const Eigen::Index res = grid.resolution;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(res * res));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    // Row-major flat index; stable sort keeps the lowest index first among ties.
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return grid.density(a / res, a % res) > grid.density(b / res, b % res);
    });
    HdrMask mask;
    mask.grid = &grid;
    mask.inside.setConstant(res, res, false);
    double acc = 0.0;
    for (Eigen::Index flat : order) {
        if (acc >= mass) break;
        const Eigen::Index r = flat / res, c = flat % res;
        mask.inside(r, c) = true;
        acc += grid.density(r, c) * grid.weight(r, c);
    }
    return mask;
}

void write_grid_csv(std::ostream& out, const GridPosterior& grid) {
    out << "x,y,density\n";
    out.precision(17);
    for (Eigen::Index r = 0; r < grid.resolution; ++r)
        for (Eigen::Index c = 0; c < grid.resolution; ++c)
            out << grid.x(c) << ',' << grid.y(r) << ',' << grid.density(r, c) << '\n';
}

}  // namespace bruf
