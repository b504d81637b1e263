#pragma once

#include <string>
#include <vector>

#include "pshlab/grid.hpp"

namespace pshlab {

// Sampled distribution function t -> mu(phi < -t) (or mu(phi < phihat - t)
// in the stability setting).  Samples are taken on an increasing t-grid with
// t[0] = 0; value(t) uses step interpolation from the left sample, which
// over-estimates the exact distribution and keeps every bound built on top of
// it one-sided.
struct DistributionFunction {
    std::vector<double> t;
    std::vector<double> F;
    double mu_total = 1.0;

    double value(double s) const;
    // largest sampled t with positive mass, minus one sample step
    double default_T0() const;
    double t_max() const { return t.empty() ? 0.0 : t.back(); }
    void validate() const;
};

// mu(phi < -t) on the given t grid.  phi must be sup-normalized:
// |max phi| <= 1e-8, otherwise NormalizationError.
DistributionFunction distribution_function(const GridFunction& phi, const GridMeasure& mu,
                                           const std::vector<double>& t_grid);

// Variant for the stability setting: mu(phi < phihat - t).
DistributionFunction distribution_function_gap(const GridFunction& phi, const GridFunction& phihat,
                                               const GridMeasure& mu,
                                               const std::vector<double>& t_grid);

enum class ChiMode { uniform, stability, local };

std::string to_string(ChiMode m);

// Concave increasing weight chi: (-inf, 0] -> (-inf, 0] with chi(0) = 0 and
// chi'(0) >= 1, represented through its positive counterpart h(t) = -chi(-t),
// which is convex increasing with h(0) = 0 and h' >= 1.
//
// The tabulated kind is built from a distribution function: g' on [0, T0]
// follows the mode (1/((1+t)^2 F) for uniform and local, 1/F for stability),
// the tail is the mode's fixed integrable profile, g(0) = 1, and
// h'(t) = g(t)^(1/power).  Beyond the tabulated horizon h continues linearly
// with its final slope.
class WeightChi {
public:
    // chi(s) = s
    static WeightChi identity();
    // chi(s) = log(1 + s) for s >= -t_cut, linear with matching slope below;
    // equivalently h(t) = -log(1 - t) truncated at t_cut in (0, 1).
    static WeightChi truncated_log(double t_cut);
    // diagnostic constructor used by tests: piecewise-linear h through the
    // given samples, no invariant enforcement
    static WeightChi from_h_samples(std::vector<double> t, std::vector<double> h);

    double h(double t) const;
    double hprime(double t) const;
    double chi(double s) const { return -h(-s); }
    double chiprime(double s) const { return hprime(-s); }

    // g(t) = h'(t)^power (closed form for tabulated weights)
    double g(double t) const;
    double gprime(double t) const;

    double power() const { return power_; }
    ChiMode mode() const { return mode_; }
    double T0() const { return T0_; }
    // horizon beyond which h is extended linearly
    double linear_horizon() const { return t_linear_; }
    // normalization certificate from construction; 0 when not applicable
    double B_bound() const { return B_bound_; }
    const std::vector<double>& knots() const { return knots_; }

    struct InvariantReport {
        bool ok = false;
        double h0 = 0.0;
        double hprime0 = 0.0;
        double h_at_1 = 0.0;
        double worst_convexity = 0.0; // min of h' increments over probes
    };
    InvariantReport check_invariants() const;

private:
    enum class Kind { identity, log1p, tabulated, samples };
    Kind kind_ = Kind::identity;
    double power_ = 1.0;
    ChiMode mode_ = ChiMode::uniform;
    double T0_ = 0.0;
    double t_cut_ = 0.0;
    double t_linear_ = 0.0;
    double B_bound_ = 0.0;

    // tabulated representation
    std::vector<double> knots_;    // piece boundaries, knots_[0] = 0
    std::vector<double> Fk_;       // distribution value on [knots_[k], knots_[k+1])
    std::vector<double> g_at_;     // g at knots_
    std::vector<double> h_at_;     // h at knots_
    double tail_g0_ = 1.0;         // g at T0 (tail start)

    // sample representation (diagnostic)
    std::vector<double> st_, sh_;

    double g_tabulated(double t) const;
    double h_tabulated(double t) const;

    friend WeightChi build_chi(const DistributionFunction&, double, double, ChiMode);
};

// Construct the mode's weight from a sampled distribution.  Requires
// dist.F > 0 on [0, T0] (ZeroMass otherwise) and power >= 1.
// For uniform mode the normalization certificate B_bound() is <= 2 by
// construction; for stability mode it is <= 1 + t_max of the distribution.
WeightChi build_chi(const DistributionFunction& dist, double power, double T0, ChiMode mode);

// One-sided tail bound t -> Atilde / h(t)^m.
struct ChebyshevBound {
    double Atilde = 1.0;
    double m = 1.0;
    const WeightChi* chi = nullptr;
    double operator()(double t) const;
};

ChebyshevBound chebyshev_bound(double Atilde, const WeightChi& chi, double m);

} // namespace pshlab
