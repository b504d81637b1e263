#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/weight_chi.hpp"

namespace pshlab {

// Certified sup-level bounds for omega-psh potentials against measures with
// finite moment budgets.
//
// The mechanism shared by all three modes: if the measure's potentials carry
// an m-th moment budget A_m (see convention below), a concave reweighting chi
// of the potential turns the level-set distribution into a differential
// inequality for h(t) = -chi(-t), namely
//
//     h'(t) = (1 + h(t)^alpha / (alpha * A * (1+t)^2))^(1/beta),  h(0) = 0,
//
// whose solution blows up at a finite horizon T whenever alpha > beta.  Any
// admissible distribution of level-set mass forces sup-defects past T to carry
// zero mass, so T is an explicit bound.  The certificate records every derived
// constant and every inequality checked along the way.
//
// Moment convention: the A_m consumed by uniform_bound / local_bound /
// stability_bound / bound_self_consistency is the *raw moment* budget,
//
//     A_m  >=  sup { integral of (-psi)^m dmu :  psi omega-psh, sup psi = 0 },
//
// i.e. not its m-th root.  estimate_Am below reports root-convention values
// (directly comparable to sup-norms); raise its output to the m-th power
// before feeding it to a bound.
struct TraceRow {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false; // the claim "lhs <= rhs" (up to the row's tolerance)
};

// Result of integrating the comparison inequality for one exponent pair.
struct OdeIntegration {
    double T = 0.0; // blow-up horizon of the extremal equality case
    std::vector<std::pair<std::string, double>> derived;
    std::vector<TraceRow> trace;
};

// Exponent chain for the global (torus) bound: epsilon = (m-n)/3,
// alpha = m+1, beta = n+2*epsilon+1, C = ((m+1)*Atilde)^(1/beta).  Integrates
// the extremal ODE from (0,0) to blow-up and cross-checks the closed-form cap
//   T_closed = (2^((beta-2)/beta) + C*(beta-2)/(alpha-beta))^(beta/(beta-2)) - 1.
// Requires m > n and Atilde >= 1 (ParameterError otherwise).
OdeIntegration integrate_ode_uniform(int n, double m, double Atilde);

// Sup-bound certificate.  `derived` keeps the constant chain in insertion
// order so serialized certificates are reproducible; `trace` keeps the
// inequalities actually checked.  The numeric conclusion is `bound`:
// uniform/local modes bound the sup-defect sup(-phi) by T directly, stability
// mode bounds sup(phihat - phi)_+ by T * mass^tau.
struct BoundCertificate {
    std::string mode; // "uniform" | "stability" | "local"
    int n = 0;
    double m = 0.0;
    double A_m = 0.0;        // raw-moment budget (see convention above)
    double phihat_sup = 0.0; // stability mode only
    double mass = 0.0;       // stability mode only
    std::vector<std::pair<std::string, double>> derived;
    double T = 0.0;
    double bound = 0.0;
    std::vector<TraceRow> trace;

    bool all_pass() const;
    // Named lookup into `derived`; ParameterError when the key is absent.
    double derived_value(const std::string& key) const;
    std::string to_json() const;
};

// Global bound: Atilde = (1 + 2^(1/epsilon)) * A_m with epsilon = (m-n)/3,
// then the uniform exponent chain.  Atilde is floored at 1 (recorded in the
// certificate) so the ODE preconditions hold for small budgets.
BoundCertificate uniform_bound(int n, double m, double A_m);

// Local (bounded-domain) variant: the reweighting power drops to n, so
// alpha = m+1, beta = n+1 and the budget A_m enters unscaled; requires
// A_m >= 1.  The tail normalization budget (<= 2) is recorded.
BoundCertificate local_bound(int n, double m, double A_m);

// Stability: how far phi can drop below a reference potential phihat in terms
// of mass = integral of (phihat - phi)_+ dmu.  Produces T and tau with
//     sup (phihat - phi)_+  <=  T * mass^tau.
// Exponents default to a = eps/8, b = eps/4, c = eps/3 with eps = m - n; the
// Hoelder-chain constants C1..C5 are derived from the budget A_m, the
// reference sup-norm phihat_sup >= 0 and the global horizon, and every
// exponent identity is checked in the trace.  mass = 0 yields bound = 0.
BoundCertificate stability_bound(int n, double m, double A_m, double phihat_sup,
                                 double mass);

// Optional integrability data for the heuristic upper estimate: the density
// f = dmu/dV lies in L^p with norm f_norm_p; skoda_samples > 0 caps how many
// candidates enter the volume-moment scan (0 = all).
struct HolderInput {
    double p = 2.0;
    double f_norm_p = 1.0;
    int skoda_samples = 0;
};

// Candidate-family moment estimate.  Values are root convention:
//   lower = max over candidates of (integral (-psi)^m dmu)^(1/m),
// a certified lower bound for A_m^(1/m); upper_heuristic multiplies the
// Hoelder bound ||f||_p^(1/m) * (max integral (-psi)^(qm) dV)^(1/(qm)),
// q = p/(p-1), by a safety factor and is explicitly heuristic, not a proof.
struct AmEstimate {
    double lower = 0.0;
    double upper_heuristic = 0.0;
    bool upper_available = false;
};

// Candidates must share mu's grid layout and be sup-normalized
// (|max psi| <= 1e-8, NormalizationError otherwise); requires m >= 1 and a
// non-empty family (EmptyCandidates).
AmEstimate estimate_Am(const GridMeasure& mu, double m,
                       const std::vector<GridFunction>& candidates,
                       const std::optional<HolderInput>& holder = std::nullopt,
                       double safety = 10.0);

struct OrliczReport {
    double norm = 0.0;
    bool admissible = false;
};

// Luxembourg norm of f >= 0 (negative entries are clamped to 0) for the Young
// function w(t) = t * (log(e + t))^m:
//   norm = inf { r > 0 : integral w(f/r) dV <= 1 },
// found by bracketing and bisection; admissible = norm finite at grid scale.
OrliczReport orlicz_check(const GridFunction& f, double m);

// Replays the certificate chain on measured level-set data: builds the
// uniform-mode weight from `dist`, then checks (with A_m the raw-moment
// budget of the sampled potential)
//   - h(1) >= 1 and convexity of h,
//   - the reweighting normalization budget <= 2,
//   - the raw moment of the reweighted potential stays within Atilde,
//   - the tail bound Atilde / h^m dominates the sampled distribution,
//   - the integrated comparison inequality along the measured h.
// Every row is a genuine data check; failures indicate the supplied A_m was
// not a true budget for the instance.
std::vector<TraceRow> bound_self_consistency(const DistributionFunction& dist,
                                             int n, double m, double A_m);

} // namespace pshlab
