#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"

namespace pshlab::detail {

// Spectral helper on the periodic grid: forward/backward transforms with
// cached plans, plus solves of the constant-coefficient operators that appear
// as exact (n = 1) or preconditioning (n = 2) linearizations.  The node
// layout is row-major with the last axis fastest, which is also FFTW's
// convention, so indices map one-to-one.
class TorusSpectral {
public:
    explicit TorusSpectral(const PeriodicGrid& grid);
    ~TorusSpectral();
    TorusSpectral(const TorusSpectral&) = delete;
    TorusSpectral& operator=(const TorusSpectral&) = delete;

    // Solve (kappa/4) Delta_h v = rhs with mean-zero v; the rhs is projected
    // onto mean zero first (the operator annihilates constants).
    std::vector<double> poisson(const std::vector<double>& rhs, double kappa) const;

    // Solve tr(P H(v)) = rhs for the constant Hermitian matrix P (n = 2
    // preconditioner; for n = 1 P is scalar and this reduces to poisson with
    // a scale).  Mean-zero convention as above.
    std::vector<double> constant_coefficient_solve(const std::vector<double>& rhs, const Herm& P,
                                                   double kappa) const;

private:
    void forward() const;   // buf_ -> hat_
    void backward() const;  // hat_ -> buf_ (unnormalized; callers divide by N)

    PeriodicGrid grid_;
    std::size_t count_;
    fftw_complex* buf_ = nullptr;
    fftw_complex* hat_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    std::vector<double> cosv_, sinv_;  // cos/sin(2 pi k / res) per frequency
};

} // namespace pshlab::detail
