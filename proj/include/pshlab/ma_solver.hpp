#pragma once

#include <string>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"
#include "pshlab/hessian.hpp"

namespace pshlab {

struct SolveConfig {
    double newton_tol = 1e-10;  // max-norm residual on det/V - density
    int max_newton = 60;        // per continuity stage
    double damping = 1.0;       // initial Newton step factor in (0, 1]
    int continuity_steps = 4;   // density homotopy stages from uniform
    enum class Normalization { sup_zero, mean_zero };
    Normalization normalization = Normalization::sup_zero;
    double krylov_tol = 1e-12;  // relative tolerance of the inner linear solves
    int max_krylov = 400;
};

struct TorusSolution {
    GridFunction phi;   // gauge-normalized potential
    double residual = 0.0;        // max |det(beta+H(phi))/V_disc - density|
    int newton_steps = 0;         // total over all continuity stages
    int continuity_stages = 0;
    double v_disc = 0.0;          // discrete volume at the solution
    std::vector<double> residual_trace;  // residual after each Newton step
};

// Solve det(beta + H(phi)) = V_disc * density on the torus, where density is
// the weight field of the probability measure mu and V_disc is the discrete
// total Monge-Ampere mass (so the compatibility condition holds exactly at
// every iterate).  Damped Newton on the log-determinant form along a density
// homotopy from the uniform measure.
TorusSolution solve_torus(const GridMeasure& mu, const HermitianBackground& bg,
                          const SolveConfig& cfg = {});

enum class ManufacturedKind { flat, sine, two_bump };

// How the measure of a manufactured instance is produced:
//   discrete   — normalized node-wise discrete MA density of phi_star (the
//                solver can reproduce phi_star to its own tolerance);
//   continuum  — symbolic continuum MA density sampled at nodes (recovering
//                phi_star then carries the O(spacing^2) discretization error).
enum class ManufacturedFlavor { discrete, continuum };

struct ManufacturedInstance {
    GridFunction phi_star;  // sup-zero normalized
    GridMeasure mu;         // probability measure
};

ManufacturedInstance manufactured_instance(ManufacturedKind kind, double amplitude,
                                           const PeriodicGrid& grid,
                                           const HermitianBackground& bg,
                                           ManufacturedFlavor flavor = ManufacturedFlavor::discrete);

struct DominationReport {
    bool hypothesis_holds = false;   // u >= v - tol wherever ma(u) > mass_tol
    double worst_hypothesis_violation = 0.0;  // max of (v - u - tol) on the mass carrier
    double worst_global_violation = 0.0;      // max of (v - u) over all nodes
    std::size_t carrier_count = 0;            // nodes with ma(u) > mass_tol
    bool pass = false;  // hypothesis holds and v <= u + slack globally
};

// Discrete domination principle checker: where the MA mass of u lives,
// u >= v - tol should force u >= v - slack everywhere (slack = 2 tol).
// Report-only; never throws on violations.
DominationReport domination_check(const GridFunction& u, const GridFunction& v,
                                  const HermitianBackground& bg, double tol,
                                  double mass_tol = 1e-8);

// Radial potential on the unit ball, stored on a log-radius mesh.  For a
// rotation-invariant density the Dirichlet problem reduces to a first-order
// profile equation: with s = log r and M(r) the mass of the ball of radius r,
// the slope dv/ds equals (M(r) / c_n)^{1/n}, and the potential integrates the
// slope down from the boundary value 0.  The slope is nonnegative and
// nondecreasing, so v is convex nondecreasing in s.
struct RadialProfile {
    std::vector<double> radii;  // increasing mesh in (0, 1], last entry 1
    std::vector<double> v;      // potential at radii (a function of s = log r)
    std::vector<double> slope;  // dv/ds at the mesh nodes
    double boundary_value = 0.0;
    double total_mass = 0.0;    // mass of the whole ball (after truncation)

    // Linear interpolation in s = log r; r >= 1 gives the boundary value and
    // r below the mesh continues with the innermost slope (exact whenever the
    // mass inside the innermost radius is constant).
    double value_at(double r) const;

    // Discrete convexity / monotonicity / boundary checks.
    void validate(double tol = 1e-9) const;
};

// Solve (dd^c u)^n = density dV on the unit ball of C^n with u = 0 on the
// boundary, for a radial density given as a function of r.  Cumulative masses
// come from per-cell Gauss quadrature plus a refinement ladder on the inner
// disk; that ladder also detects non-integrable concentrations.
RadialProfile solve_radial_ball(const std::function<double(double)>& density, int n,
                                const SolveConfig& cfg = {}, int res = 800,
                                double r_min = 1e-3, double ddc_factor = 2.0);

} // namespace pshlab
