#include "pshlab/hermitian.hpp"

namespace pshlab {

HermitianBackground::HermitianBackground(int n, Herm beta, double ddc_factor)
    : n_(n), beta_(beta), kappa_(ddc_factor) {
    if (n != 1 && n != 2) throw ParameterError("background: n must be 1 or 2");
    if (beta.n != n) throw ParameterError("background: beta dimension mismatch");
    if (!(ddc_factor > 0.0)) throw ParameterError("background: ddc_factor must be positive");
    if (!(beta.lambda_min() > 0.0))
        throw PositivityViolation("background form must be positive definite");
}

HermitianBackground HermitianBackground::standard(int n, double scale, double ddc_factor) {
    return HermitianBackground(n, Herm::identity(n) * scale, ddc_factor);
}

double HermitianBackground::volume(const PeriodicGrid& grid) const {
    if (grid.n() != n_) throw ParameterError("background/grid dimension mismatch");
    double p = 1.0;
    for (int a = 0; a < grid.dims(); ++a) p *= grid.period();
    return beta_.det() * p;
}

} // namespace pshlab
