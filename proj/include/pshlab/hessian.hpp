#pragma once

#include <memory>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"

namespace pshlab {

// Discrete complex Hessian field: one Hermitian n x n matrix per node,
// kappa * u_{j kbar}, built from second-order central stencils.  Diagonal
// entries use the pure second differences along the two real axes of each
// complex coordinate; off-diagonal entries use the symmetric 4-point mixed
// stencil, which makes the matrix exactly Hermitian node-wise.
class HessianField {
public:
    HessianField() = default;
    HessianField(const PeriodicGrid& grid, int n);

    const PeriodicGrid& grid() const { return *grid_; }
    int n() const { return n_; }
    std::size_t size() const { return h11_.size(); }

    Herm at(std::size_t i) const {
        if (n_ == 1) return Herm::scalar(h11_[i]);
        return Herm{2, h11_[i], h22_[i], {h12re_[i], h12im_[i]}};
    }

    void set(std::size_t i, const Herm& h) {
        h11_[i] = h.a11;
        if (n_ == 2) {
            h22_[i] = h.a22;
            h12re_[i] = h.a12.real();
            h12im_[i] = h.a12.imag();
        }
    }

private:
    std::shared_ptr<const PeriodicGrid> grid_;
    int n_ = 1;
    std::vector<double> h11_, h22_, h12re_, h12im_;
};

// kappa * u_{j kbar} at every node.  Exactly periodic, exactly Hermitian.
HessianField complex_hessian(const GridFunction& u, const HermitianBackground& bg);

// Pure second difference of u along one axis at one node (exposed for reuse
// by the per-node envelope updates and tests).
double second_difference(const GridFunction& u, std::size_t idx, int axis);

// Node-wise det(beta + H(u)).  No positivity requirement; callers that need a
// measure clamp negative values themselves.
GridFunction ma_density(const GridFunction& u, const HermitianBackground& bg);

// Node-wise mixed Monge-Ampere density with j factors of (beta + H(u)) and
// n - j factors of (beta + H(v)).  j = n gives ma_density(u), j = 0 gives
// ma_density(v).
GridFunction mixed_ma(const GridFunction& u, const GridFunction& v, int j,
                      const HermitianBackground& bg);

struct PshReport {
    bool psh = false;
    double worst_lambda_min = 0.0;
    std::size_t worst_node = 0;
};

// Node-wise eigenvalue test: min over nodes of lambda_min(beta + H(u)) >= -tol.
PshReport is_omega_psh(const GridFunction& u, const HermitianBackground& bg, double tol);

// ma_density integrated against the uniform volume element; for smooth data
// this reproduces the background volume up to O(spacing^2) (exactly for n = 1).
double ma_total_mass(const GridFunction& u, const HermitianBackground& bg);

} // namespace pshlab
