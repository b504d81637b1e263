#include "pshlab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace pshlab {

PeriodicGrid::PeriodicGrid(int n, int res, double period)
    : n_(n), res_(res), period_(period) {
    if (n != 1 && n != 2) throw ParameterError("n must be 1 or 2");
    if (res < 8) throw ParameterError("res must be >= 8");
    if (res % 2 != 0) throw ParameterError("res must be even");
    if (!(period > 0.0) || !std::isfinite(period)) throw ParameterError("period must be positive");
    spacing_ = period_ / res_;
    count_ = 1;
    for (int a = 0; a < dims(); ++a) count_ *= static_cast<std::size_t>(res_);
    cell_volume_ = std::pow(spacing_, dims());
    // last axis fastest
    std::size_t s = 1;
    for (int a = dims() - 1; a >= 0; --a) {
        stride_[a] = s;
        s *= static_cast<std::size_t>(res_);
    }
    for (int a = dims(); a < 4; ++a) stride_[a] = 0;
}

std::array<int, 4> PeriodicGrid::unpack(std::size_t idx) const {
    std::array<int, 4> c{0, 0, 0, 0};
    for (int a = dims() - 1; a >= 0; --a) {
        c[a] = static_cast<int>(idx % res_);
        idx /= res_;
    }
    return c;
}

std::size_t PeriodicGrid::pack(const std::array<int, 4>& c) const {
    std::size_t idx = 0;
    for (int a = 0; a < dims(); ++a) idx = idx * res_ + static_cast<std::size_t>(c[a]);
    return idx;
}

std::size_t PeriodicGrid::shift(std::size_t idx, int axis, int delta) const {
    const std::size_t stride = stride_[axis];
    const int cur = static_cast<int>((idx / stride) % res_);
    int next = (cur + delta) % res_;
    if (next < 0) next += res_;
    return idx + (static_cast<std::size_t>(next) - static_cast<std::size_t>(cur)) * stride;
}

double PeriodicGrid::coord(std::size_t idx, int axis) const {
    const int i = static_cast<int>((idx / stride_[axis]) % res_);
    return i * spacing_;
}

double PeriodicGrid::wrap_delta(double a, double b) const {
    double d = a - b;
    d -= period_ * std::round(d / period_);
    return d;
}

GridFunction::GridFunction(const PeriodicGrid& grid, double fill)
    : grid_(std::make_shared<PeriodicGrid>(grid)), values_(grid.node_count(), fill) {}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

void GridFunction::check_finite(const std::string& what) const {
    for (double v : values_)
        if (!std::isfinite(v)) throw ParameterError(what + " has non-finite values");
}

GridFunction GridFunction::sample(const PeriodicGrid& grid,
                                  const std::function<double(const std::array<double, 4>&)>& f) {
    GridFunction out(grid);
    std::array<double, 4> x{0, 0, 0, 0};
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const auto c = grid.unpack(i);
        for (int a = 0; a < grid.dims(); ++a) x[a] = c[a] * grid.spacing();
        out[i] = f(x);
    }
    return out;
}

GridMeasure::GridMeasure(const PeriodicGrid& grid, std::vector<double> weights)
    : grid_(std::make_shared<PeriodicGrid>(grid)), weights_(std::move(weights)) {
    if (weights_.size() != grid.node_count())
        throw ParameterError("measure weight count does not match grid");
    for (double w : weights_) {
        if (!std::isfinite(w)) throw ParameterError("measure weight not finite");
        if (w < 0.0) throw ParameterError("measure weight negative");
    }
}

GridMeasure GridMeasure::uniform_probability(const PeriodicGrid& grid) {
    const double w = 1.0 / (grid.node_count() * grid.cell_volume());
    return GridMeasure(grid, std::vector<double>(grid.node_count(), w));
}

double GridMeasure::total_mass() const {
    return pairwise_sum(weights_) * grid_->cell_volume();
}

void GridMeasure::normalize_probability() {
    const double m = total_mass();
    if (!(m > 0.0)) throw ZeroMass("cannot normalize measure with zero mass");
    for (double& w : weights_) w /= m;
}

namespace {
double pairwise_sum_rec(const double* data, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += data[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum_rec(data, half) + pairwise_sum_rec(data + half, count - half);
}
} // namespace

double pairwise_sum(const double* data, std::size_t count) { return pairwise_sum_rec(data, count); }
double pairwise_sum(const std::vector<double>& data) {
    return pairwise_sum_rec(data.data(), data.size());
}

double integrate(const GridFunction& f, const GridMeasure& mu) {
    if (!f.grid().same_layout(mu.grid()))
        throw ParameterError("integrate: function and measure live on different grids");
    std::vector<double> prod(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) prod[i] = f[i] * mu.weight(i);
    return pairwise_sum(prod) * f.grid().cell_volume();
}

double oscillation(const GridFunction& u) { return u.max() - u.min(); }

} // namespace pshlab
