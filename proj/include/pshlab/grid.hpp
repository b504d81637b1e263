#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pshlab/errors.hpp"

namespace pshlab {

// Uniform periodic grid on the flat torus, n complex dimensions (n = 1 or 2),
// res sample points per real axis, 2n real axes.  Nodes are indexed row-major
// with axis order (x1, y1[, x2, y2]) and the last axis fastest.  The cell
// volume is spacing^(2n); all quadrature on the torus is midpoint quadrature
// with this weight.
class PeriodicGrid {
public:
    PeriodicGrid(int n, int res, double period = 1.0);

    int n() const { return n_; }
    int res() const { return res_; }
    double period() const { return period_; }
    double spacing() const { return spacing_; }
    int dims() const { return 2 * n_; }
    std::size_t node_count() const { return count_; }
    double cell_volume() const { return cell_volume_; }

    // Decompose a flat index into per-axis coordinates i[0..2n).
    std::array<int, 4> unpack(std::size_t idx) const;
    std::size_t pack(const std::array<int, 4>& c) const;

    // Neighbor with coordinate shifted by delta (wraps around). delta may be
    // any integer.
    std::size_t shift(std::size_t idx, int axis, int delta) const;

    // Physical coordinate of a node along one axis, in [0, period).
    double coord(std::size_t idx, int axis) const;

    // Shortest displacement along one axis between two coordinates, in
    // [-period/2, period/2).
    double wrap_delta(double a, double b) const;

    bool same_layout(const PeriodicGrid& other) const {
        return n_ == other.n_ && res_ == other.res_ && period_ == other.period_;
    }

private:
    int n_;
    int res_;
    double period_;
    double spacing_;
    std::size_t count_;
    double cell_volume_;
    std::array<std::size_t, 4> stride_;
};

// Scalar field sampled at grid nodes.  Values must stay finite; callers that
// model poles truncate before storing.  The grid descriptor is small and is
// owned (copied) by the function, so fields never outlive their grid.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const PeriodicGrid& grid, double fill = 0.0);

    const PeriodicGrid& grid() const { return *grid_; }
    bool has_grid() const { return grid_ != nullptr; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double min() const;
    double max() const;
    void check_finite(const std::string& what) const;

    static GridFunction sample(const PeriodicGrid& grid,
                               const std::function<double(const std::array<double, 4>&)>& f);

private:
    std::shared_ptr<const PeriodicGrid> grid_;
    std::vector<double> values_;
};

// Positive measure carried by grid nodes: nonnegative weight per node, mass
// element weight * cell_volume.  Densities are stored as weights directly.
class GridMeasure {
public:
    GridMeasure() = default;
    GridMeasure(const PeriodicGrid& grid, std::vector<double> weights);

    static GridMeasure uniform_probability(const PeriodicGrid& grid);

    const PeriodicGrid& grid() const { return *grid_; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }

    double total_mass() const;

    // Scale weights so total_mass() == 1 within round-off.
    void normalize_probability();

private:
    std::shared_ptr<const PeriodicGrid> grid_;
    std::vector<double> weights_;
};

// Deterministic pairwise tree reduction; used for every integral so sums are
// bit-reproducible regardless of call site.
double pairwise_sum(const double* data, std::size_t count);
double pairwise_sum(const std::vector<double>& data);

// integral of f against mu: sum of f * weight * cell_volume.
double integrate(const GridFunction& f, const GridMeasure& mu);

// max - min over nodes.
double oscillation(const GridFunction& u);

} // namespace pshlab
