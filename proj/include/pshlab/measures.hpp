#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"

namespace pshlab {

// ---------------------------------------------------------------------------
// Density specifications
// ---------------------------------------------------------------------------
//
// A DensitySpec describes a reference density f >= 0 on the torus purely by
// parameters, so that specs can live in JSON files and be rebuilt at any
// resolution.  build_density() samples the density on a grid, truncates the
// singular factors, and rescales to a probability measure.
//
// Kinds:
//   "uniform"       f == 1.
//   "manufactured"  smooth positive modulation
//                       f = 1 + amplitude * (cos(2 pi x1) + 0.7 cos(2 pi y1))
//                   (n = 2 adds 0.5 cos(2 pi x2) - 0.3 cos(2 pi y2));
//                   requires amplitude small enough to keep f > 0.
//   "lp-singular"   sum over centers of |z - z_i|^(-strength_i), where the
//                   strength is the full exponent 2a of the pole and |.| is
//                   the shortest torus distance.  Declared to lie in L^p;
//                   validation enforces strength * p < 2n for every center.
//   "orlicz"        sum over centers of r^(-2n) * (-log(r/2))^(-(m+2)) with
//                   m = orlicz_m: integrable, admissible for the Zygmund-type
//                   gauge x * (log(e + x))^m, but in no L^p with p > 1.
//   "exp-singular"  f = g * exp(-psi) with psi the log-model weight whose
//                   Lelong coefficients are `strengths` at `centers`, and g
//                   the density described by g_factor (g == 1 when absent).
//
// Truncation: each singular radial factor is capped at its value one grid
// cell away from the center (or at the explicit `truncation` level if that is
// positive).  build_density reports the caps it applied via truncation_log.
struct DensitySpec {
    std::string kind = "uniform";

    // Torus coordinates of each pole, axis order (x1, y1, x2, y2); unused
    // axes must be zero.  One strength per center: the exponent 2a for
    // "lp-singular", the Lelong coefficient c for "exp-singular"; ignored by
    // the smooth kinds and by "orlicz" (whose profile is fixed by orlicz_m).
    std::vector<std::array<double, 4>> centers;
    std::vector<double> strengths;

    double p = 1.5;         // declared L^p class of the singular part
    double orlicz_m = 3.0;  // gauge exponent for kind "orlicz"
    double q = 2.0;         // companion integrability index recorded with
                            // "exp-singular" specs (drives E_{1/q} analyses)
    double amplitude = 0.5; // modulation amplitude for "manufactured"
    double truncation = 0.0; // 0 = automatic one-cell rule; > 0 = explicit cap
                             // on every singular radial factor

    // Smooth / L^p factor g of an "exp-singular" density; null means g == 1.
    std::shared_ptr<const DensitySpec> g_factor;

    // Throws ParameterError on an unknown kind, mismatched centers/strengths,
    // parameters outside their documented ranges, or a declared L^p class the
    // pole exponents contradict (strength * p >= 2n).
    void validate(int n) const;
};

// JSON round-trip for specs referenced by path from experiment configs.
std::string density_spec_to_json(const DensitySpec& spec);
DensitySpec density_spec_from_json(const std::string& text);

// Sample the spec on `grid`, truncate singular factors, and normalize to a
// probability measure.  `bg` fixes the conventions of the ambient form (kept
// for interface symmetry; the sampled density does not depend on it).  If
// truncation_log is non-null it receives one applied cap per singular center
// (empty for smooth kinds).  Throws NonNormalizable when the sampled density
// has no positive mass to rescale.  raw_mass, when non-null, receives the
// total mass before the rescale to a probability measure.
GridMeasure build_density(const DensitySpec& spec, const PeriodicGrid& grid,
                          const HermitianBackground& bg,
                          std::vector<double>* truncation_log = nullptr,
                          double* raw_mass = nullptr);

// Empirical exponential-integrability probe: integral of exp(-lambda * phi)
// against the flat volume element.  Finite, monotone in lambda; used to check
// that solved potentials admit the expected exponential moments.
double skoda_integral(const GridFunction& phi, double lambda);

// ---------------------------------------------------------------------------
// Quasi-plurisubharmonic model weights
// ---------------------------------------------------------------------------

// One logarithmic pole: psi picks up coefficient * log|z - center| near the
// center, so `coefficient` is the prescribed Lelong number there.
struct LelongDatum {
    std::array<double, 4> center{};
    double coefficient = 0.0;
};

// Weight of the explicit log-model family
//
//     psi(z) = sum_i c_i * [ sum_{translates} log |z - z_i + tau| ] + smooth
//
// periodized over the 3^(2n) nearest lattice translates (the principal one
// plus its 8 neighbors for n = 1, 80 for n = 2; the rest of the lattice sum
// only shifts psi by a constant, which the sup-normalization absorbs).  The
// optional smooth part is smooth_amplitude * cos(2 pi x1 / period).
//
// Grid values are truncated: every translate distance is floored at one grid
// cell before taking the log, and the result is shifted so max over nodes is
// zero.  The curvature constant K is measured on the truncated grid samples:
// the smallest K >= 0 with  H(psi) + K * beta >= 0  at every node.
class QuasiPshWeight {
public:
    QuasiPshWeight(const PeriodicGrid& grid, std::vector<LelongDatum> data,
                   const HermitianBackground& bg, double smooth_amplitude = 0.0);

    const PeriodicGrid& grid() const { return *grid_; }
    const HermitianBackground& background() const { return *bg_; }
    const std::vector<LelongDatum>& lelong_data() const { return data_; }
    double smooth_amplitude() const { return smooth_amplitude_; }

    // Truncated, sup-normalized samples (max == 0 over nodes).
    const GridFunction& values() const { return values_; }
    double truncation_floor() const { return r_floor_; }      // cell radius
    double normalization_shift() const { return shift_; }     // subtracted sup
    double curvature_constant() const { return K_; }

    // Continuum periodized formula without the radial floor, shifted by the
    // same normalization constant; this is what radial fits sample, so the
    // fit sees the genuine log slope below one grid cell.
    double evaluate_untruncated(const std::array<double, 4>& x) const;

private:
    std::shared_ptr<const PeriodicGrid> grid_;
    std::shared_ptr<const HermitianBackground> bg_;
    std::vector<LelongDatum> data_;
    double smooth_amplitude_ = 0.0;
    double r_floor_ = 0.0;
    double shift_ = 0.0;
    double K_ = 0.0;
    GridFunction values_;
};

// Resolution-free description of a QuasiPshWeight, so weights can live in
// JSON files next to density specs and be rebuilt on any grid via
// QuasiPshWeight(grid, spec.data, bg, spec.smooth_amplitude).
struct WeightSpec {
    std::vector<LelongDatum> data;
    double smooth_amplitude = 0.0;
};

std::string weight_spec_to_json(const WeightSpec& spec);
WeightSpec weight_spec_from_json(const std::string& text);

// Lelong number of psi at x, measured as the least-squares slope of
// max_{|z - x| = r} psi against log r over dyadic radii.  Returns ~c at a
// pole of coefficient c and ~0 where psi is bounded.  Throws FitUnstable
// when the ring maxima are not close to affine in log r.
double lelong_number(const QuasiPshWeight& psi, const std::array<double, 4>& x);

// Mask (1 = singular) of grid nodes carrying declared Lelong number >= c:
// each pole is snapped to its nearest node and coefficients at coinciding
// nodes accumulate.  Monotone: raising c can only shrink the mask.
std::vector<std::uint8_t> singular_set(const QuasiPshWeight& psi, double c);

// ---------------------------------------------------------------------------
// Relative lower bounds phi >= alpha * psi - beta
// ---------------------------------------------------------------------------

struct RelativeBoundReport {
    double alpha = 0.0;
    double beta = 0.0;
    double q = 0.0;

    bool lower_bound_holds = false; // phi >= alpha * psi - beta at every node
    double worst_margin = 0.0;      // min over nodes of phi - (alpha*psi - beta)

    double sup_phi = 0.0;
    double min_phi_global = 0.0;
    std::size_t singular_nodes = 0; // size of the declared set {nu >= 1/q}

    // min_phi_at_distance[k] = min of phi over nodes at torus Chebyshev
    // distance >= k grid cells from the singular set (k = 0 is the global
    // min).  With no singular nodes every entry equals the global min.
    std::vector<double> min_phi_at_distance;
};

// Report-only check of the relative bound: node-wise margin of
// phi >= alpha * psi - beta (psi taken as the truncated grid samples), plus
// the profile of min phi at increasing cell distances from {nu >= 1/q}.
// Callers normalize phi to sup zero first; nothing here throws on failure.
RelativeBoundReport relative_bound_check(const GridFunction& phi,
                                         const QuasiPshWeight& psi,
                                         double alpha, double beta, double q,
                                         int max_cells = 8);

} // namespace pshlab
