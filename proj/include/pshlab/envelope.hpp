#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"
#include "pshlab/hessian.hpp"
#include "pshlab/weight_chi.hpp"

namespace pshlab {

// Options for the obstacle-problem iteration.  The default configuration runs
// a coarse-to-fine cascade followed by projected SOR sweeps; `plain` switches
// to the reference scheme (start at the obstacle, full per-node updates,
// clamped so the iterate sequence is node-wise non-increasing), which is
// slower but carries the monotonicity guarantee the property tests pin down.
struct EnvelopeOptions {
    double tol = 1e-11;   // stopping threshold for the complementarity residual
    int max_sweeps = 200000;
    double omega = 0.0;   // over-relaxation; 0 picks 1.9 (n = 1) / 1.25 (n = 2)
    bool cascade = true;  // initialize from coarser grids
    int coarse_res = 8;
    bool plain = false;   // reference monotone scheme, no relaxation, no cascade
    // called after each residual evaluation with (sweep, residual)
    std::function<void(int, double)> observer;
    // called with the full iterate after every sweep (diagnostics; slow)
    std::function<void(const std::vector<double>&)> iterate_sink;
};

struct EnvelopeResult {
    GridFunction u;                     // the envelope
    GridFunction obstacle;              // the input h (kept for verification)
    std::vector<std::uint8_t> contact;  // 1 where h - u <= ctol
    int iterations = 0;
    double residual = 0.0;        // max |min(h - u, s^2/kappa lambda_min)|
    double eigen_residual = 0.0;  // max |min(h - u, lambda_min(beta + H(u)))|
    double ctol = 0.0;            // contact tolerance used for the mask
    bool converged = false;
};

// Largest function below h whose background-shifted complex Hessian stays
// positive semidefinite node-wise: solves min(h - u, lambda_min(beta + H(u)))
// = 0 by per-node exact updates (the constraint is linear in the center value,
// so the update is closed-form).  Throws NonConvergence if the residual target
// is not met within max_sweeps.
EnvelopeResult psh_envelope(const GridFunction& h, const HermitianBackground& bg,
                            const EnvelopeOptions& opt = {});

// Convenience overload matching (h, bg, tol, max_iter).
EnvelopeResult psh_envelope(const GridFunction& h, const HermitianBackground& bg, double tol,
                            int max_iter);

// Mask of nodes where u touches its obstacle within ctol.
std::vector<std::uint8_t> contact_set(const GridFunction& u, const GridFunction& h, double ctol);

struct OrthogonalityReport {
    // fraction of the total (positive-part) MA mass of the envelope carried by
    // nodes off the contact set
    double off_contact_mass_fraction = 0.0;
    // max over contact nodes of |ma(u) - max(ma(h), 0)|: the envelope's
    // density should agree with the positive part of the obstacle's density
    // where they touch
    double max_contact_density_gap = 0.0;
    double total_mass = 0.0;
};

OrthogonalityReport orthogonality_report(const EnvelopeResult& r, const HermitianBackground& bg);

// The mass-fraction number alone.
double orthogonality_defect(const EnvelopeResult& r, const HermitianBackground& bg);

struct KeyLemmaReport {
    bool pass = false;
    double worst_excess = 0.0;  // max over contact nodes of lhs - rhs (<= tol passes)
    double worst_ratio = 0.0;   // max of lhs / rhs over contact nodes with rhs > 0
    std::size_t worst_node = 0;
    std::size_t contact_count = 0;
    double envelope_residual = 0.0;
};

// Verifies, for psh phi <= phihat and a concave increasing weight with slope
// >= 1 at zero, that the envelope u of  phihat + chi(phi - phihat)  satisfies
//   ma(u) <= chi'(phi - phihat)^n ma(phi)  on the contact set, within tol.
KeyLemmaReport key_lemma_check(const GridFunction& phi, const GridFunction& phihat,
                               const WeightChi& chi, const HermitianBackground& bg,
                               double ineq_tol, const EnvelopeOptions& opt = {});

} // namespace pshlab
