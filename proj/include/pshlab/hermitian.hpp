#pragma once

#include <cmath>
#include <complex>

#include "pshlab/errors.hpp"
#include "pshlab/grid.hpp"

namespace pshlab {

// Hermitian n x n matrix for n <= 2, stored as (a11, a22, a12).  For n = 1
// only a11 is meaningful.  All spectral quantities are closed-form.
struct Herm {
    int n = 1;
    double a11 = 0.0;
    double a22 = 0.0;
    std::complex<double> a12{0.0, 0.0};

    static Herm scalar(double v) { return Herm{1, v, 0.0, {0.0, 0.0}}; }
    static Herm diag2(double d1, double d2) { return Herm{2, d1, d2, {0.0, 0.0}}; }
    static Herm identity(int n) { return n == 1 ? scalar(1.0) : diag2(1.0, 1.0); }

    double det() const {
        if (n == 1) return a11;
        return a11 * a22 - std::norm(a12);
    }

    double trace() const { return n == 1 ? a11 : a11 + a22; }

    double lambda_min() const {
        if (n == 1) return a11;
        const double mean = 0.5 * (a11 + a22);
        const double disc = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + std::norm(a12));
        return mean - disc;
    }

    double lambda_max() const {
        if (n == 1) return a11;
        const double mean = 0.5 * (a11 + a22);
        const double disc = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + std::norm(a12));
        return mean + disc;
    }

    Herm inverse() const {
        const double d = det();
        if (n == 1) return scalar(1.0 / d);
        return Herm{2, a22 / d, a11 / d, -a12 / d};
    }

    Herm operator+(const Herm& o) const { return Herm{n, a11 + o.a11, a22 + o.a22, a12 + o.a12}; }
    Herm operator-(const Herm& o) const { return Herm{n, a11 - o.a11, a22 - o.a22, a12 - o.a12}; }
    Herm operator*(double s) const { return Herm{n, a11 * s, a22 * s, a12 * s}; }
};

// Polarized determinant: for n = 2, det(A + B) = det A + 2 mixed_det(A, B) + det B.
// For n = 1 the convention mixed_det(A, B) = a11 * b11 keeps j-fold products
// consistent (it is never called with n = 1 in the mixed branch).
inline double mixed_det(const Herm& A, const Herm& B) {
    if (A.n == 1) return A.a11 * B.a11;
    return 0.5 * (A.a11 * B.a22 + A.a22 * B.a11) -
           (A.a12.real() * B.a12.real() + A.a12.imag() * B.a12.imag());
}

// Constant background Hermitian form beta on the torus together with the
// convention factor kappa multiplying the discrete complex Hessian
// (kappa = 2 matches the exterior-derivative normalization used throughout).
class HermitianBackground {
public:
    HermitianBackground(int n, Herm beta, double ddc_factor = 2.0);

    static HermitianBackground standard(int n, double scale = 1.0, double ddc_factor = 2.0);

    int n() const { return n_; }
    const Herm& beta() const { return beta_; }
    double ddc_factor() const { return kappa_; }

    // Background volume det(beta) * period^(2n).
    double volume(const PeriodicGrid& grid) const;

    HermitianBackground scaled(double t) const { return HermitianBackground(n_, beta_ * t, kappa_); }

private:
    int n_;
    Herm beta_;
    double kappa_;
};

} // namespace pshlab
