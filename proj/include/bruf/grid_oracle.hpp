#pragma once

#include "bruf/belief.hpp"
#include "bruf/model.hpp"

#include <iosfwd>
#include <vector>

namespace bruf {

struct GridBounds {
    double x_min = -6.0;
    double x_max = 2.0;
    double y_min = -4.0;
    double y_max = 4.0;
};

/// Normalized 2-D posterior on a regular node grid. density(row, col) is the
/// value at (x(col), y(row)); mass uses trapezoidal weights.
struct GridPosterior {
    GridBounds bounds;
    Eigen::Index resolution = 0;
    Matrix density;
    double dx = 0.0;
    double dy = 0.0;

    double cell_area() const { return dx * dy; }
    double x(Eigen::Index col) const { return bounds.x_min + static_cast<double>(col) * dx; }
    double y(Eigen::Index row) const { return bounds.y_min + static_cast<double>(row) * dy; }
    /// Trapezoidal weight of a node (cell_area scaled by 1/2 on edges, 1/4 at corners).
    double weight(Eigen::Index row, Eigen::Index col) const;
    double total_mass() const;

    Vector mean() const;
    Matrix covariance() const;
    /// Row/column of the node nearest to p, clamped to the grid.
    std::pair<Eigen::Index, Eigen::Index> nearest(const Vector& p) const;
};

/// p(x|y) ∝ p(x)·exp(-½(y-h(x))ᵀR⁻¹(y-h(x))) evaluated in log space.
GridPosterior grid_posterior(const GaussianBelief& prior, const MeasurementModel& model, const Vector& y,
                             const GridBounds& bounds, Eigen::Index resolution);

/// Argmax node (ties go to the lowest (row, col)) moved by one Newton step on
/// the log density when the step stays within a cell.
Vector map_of(const GridPosterior& grid);

/// Smallest set of highest-density nodes holding at least `mass`.
struct HdrMask {
    const GridPosterior* grid = nullptr;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> inside;

    bool contains(const Vector& p) const;
};

HdrMask hdr_mask(const GridPosterior& grid, double mass);

/// x,y,density rows with a header.
void write_grid_csv(std::ostream& out, const GridPosterior& grid);

}  // namespace bruf
