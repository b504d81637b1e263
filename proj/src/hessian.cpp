#include "pshlab/hessian.hpp"

#include <limits>

namespace pshlab {

HessianField::HessianField(const PeriodicGrid& grid, int n)
    : grid_(std::make_shared<PeriodicGrid>(grid)), n_(n), h11_(grid.node_count(), 0.0) {
    if (n == 2) {
        h22_.assign(grid.node_count(), 0.0);
        h12re_.assign(grid.node_count(), 0.0);
        h12im_.assign(grid.node_count(), 0.0);
    }
}

double second_difference(const GridFunction& u, std::size_t idx, int axis) {
    const PeriodicGrid& g = u.grid();
    const double h = g.spacing();
    return (u[g.shift(idx, axis, +1)] - 2.0 * u[idx] + u[g.shift(idx, axis, -1)]) / (h * h);
}

namespace {
// symmetric 4-corner mixed second difference along axes a and b
double mixed_difference(const GridFunction& u, std::size_t idx, int a, int b) {
    const PeriodicGrid& g = u.grid();
    const double h = g.spacing();
    const std::size_t pa = g.shift(idx, a, +1), ma = g.shift(idx, a, -1);
    return (u[g.shift(pa, b, +1)] - u[g.shift(pa, b, -1)] -
            u[g.shift(ma, b, +1)] + u[g.shift(ma, b, -1)]) /
           (4.0 * h * h);
}
} // namespace

HessianField complex_hessian(const GridFunction& u, const HermitianBackground& bg) {
    const PeriodicGrid& g = u.grid();
    if (g.n() != bg.n()) throw ParameterError("complex_hessian: dimension mismatch");
    const double q = 0.25 * bg.ddc_factor();
    HessianField out(g, g.n());
    if (g.n() == 1) {
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const double d = second_difference(u, i, 0) + second_difference(u, i, 1);
            out.set(i, Herm::scalar(q * d));
        }
        return out;
    }
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        Herm h{2, 0.0, 0.0, {0.0, 0.0}};
        h.a11 = q * (second_difference(u, i, 0) + second_difference(u, i, 1));
        h.a22 = q * (second_difference(u, i, 2) + second_difference(u, i, 3));
        const double re = mixed_difference(u, i, 0, 2) + mixed_difference(u, i, 1, 3);
        const double im = mixed_difference(u, i, 0, 3) - mixed_difference(u, i, 1, 2);
        h.a12 = std::complex<double>(q * re, q * im);
        out.set(i, h);
    }
    return out;
}

GridFunction ma_density(const GridFunction& u, const HermitianBackground& bg) {
    const HessianField H = complex_hessian(u, bg);
    GridFunction out(u.grid());
    const Herm& beta = bg.beta();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (beta + H.at(i)).det();
    return out;
}

GridFunction mixed_ma(const GridFunction& u, const GridFunction& v, int j,
                      const HermitianBackground& bg) {
    const int n = bg.n();
    if (j < 0 || j > n) throw ParameterError("mixed_ma: j out of range");
    if (!u.grid().same_layout(v.grid())) throw ParameterError("mixed_ma: grid mismatch");
    if (j == n) return ma_density(u, bg);
    if (j == 0) return ma_density(v, bg);
    // n = 2, j = 1: polarized determinant of the two endomorphisms
    const HessianField Hu = complex_hessian(u, bg);
    const HessianField Hv = complex_hessian(v, bg);
    GridFunction out(u.grid());
    const Herm& beta = bg.beta();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mixed_det(beta + Hu.at(i), beta + Hv.at(i));
    return out;
}

PshReport is_omega_psh(const GridFunction& u, const HermitianBackground& bg, double tol) {
    const HessianField H = complex_hessian(u, bg);
    const Herm& beta = bg.beta();
    PshReport rep;
    rep.worst_lambda_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double lm = (beta + H.at(i)).lambda_min();
        if (lm < rep.worst_lambda_min) {
            rep.worst_lambda_min = lm;
            rep.worst_node = i;
        }
    }
    rep.psh = rep.worst_lambda_min >= -tol;
    return rep;
}

double ma_total_mass(const GridFunction& u, const HermitianBackground& bg) {
    const GridFunction d = ma_density(u, bg);
    return pairwise_sum(d.values()) * u.grid().cell_volume();
}

} // namespace pshlab
