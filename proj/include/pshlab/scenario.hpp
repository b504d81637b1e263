#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pshlab/bound_engine.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"
#include "pshlab/ma_solver.hpp"
#include "pshlab/measures.hpp"
#include "pshlab/weight_chi.hpp"

namespace pshlab {

// One experiment configuration.  A scenario names a model (periodic torus
// solve or radial ball solve), a density, a resolution ladder and the bound
// mode whose certificate the run asserts.  Scenarios serialize to a single
// JSON document; a run manifest embeds the scenario (with the density spec
// inlined) so re-running a manifest reproduces the run without any other
// files.
struct Scenario {
    std::string id = "run";
    std::string model = "torus"; // "torus" | "ball"
    int n = 1;
    std::string density_path; // empty and no inline spec -> uniform density
    std::shared_ptr<const DensitySpec> density_inline; // wins over the path
    std::vector<int> resolutions = {64}; // strictly increasing
    std::string bound_mode = "uniform"; // "uniform" | "local" | "none"
    double m = 4.0;
    std::string am_source = "estimate"; // "estimate" | "fixed"
    double am_value = 0.0; // raw-moment budget, required when am_source=fixed
    std::string outputs_dir = ".";
    std::uint64_t seed = 1;
    bool plots = false;

    void validate() const; // ParameterError on inconsistent fields
};

std::string scenario_to_json(const Scenario& s);
// Accepts either a scenario document or a run manifest (the embedded
// "scenario" object is used, which is how manifests re-run).
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);

// Per-resolution outcome.  Solver failures are recorded, not thrown, so a
// ladder keeps going past a bad rung.
struct ResolutionResult {
    int res = 0;
    bool solved = false;
    double oscillation = 0.0; // max - min of the potential
    double sup_defect = 0.0;  // sup of -phi (torus, sup-normalized) or |u(0)| (ball)
    double residual = 0.0;    // final solver residual (torus model)
    int newton_steps = 0;     // total Newton steps across continuity stages
    std::string error;        // failure description when !solved
};

// Everything a run measured or derived, in deterministic key order.  The
// manifest carries no timestamps or machine identifiers: re-running the same
// scenario reproduces the JSON byte for byte.
struct RunManifest {
    Scenario scenario;        // with the density spec inlined
    std::vector<ResolutionResult> results;
    std::vector<double> truncation_log; // density truncation caps, finest grid
    double density_total_mass = 0.0;    // pre-normalization mass, finest grid
    double am_root = 0.0; // m-th-root convention value used for the budget
    double am_raw = 0.0;  // raw-moment budget fed to the bound engine
    bool am_is_heuristic = false; // estimate came from the heuristic upper path
    bool certificate_built = false;
    BoundCertificate certificate; // valid only when certificate_built
    std::vector<TraceRow> self_consistency; // uniform mode, finest resolution
    bool bound_asserted = false; // bound_mode != "none"
    bool bound_holds = false;    // every solved defect <= certificate.T
    std::vector<std::string> notes;

    bool pass() const; // all rungs solved and, if asserted, the bound holds
    std::string to_json() const;
};

// Runs a scenario end to end: solves every rung of the resolution ladder,
// measures oscillations and the level-set distribution, builds the asserted
// certificate (budget from `estimate` candidates or the fixed value), replays
// the self-consistency chain on the finest distribution, and writes the
// potential (binary + CSV), residual trace CSV, distribution CSV, certificate
// trace CSV and the manifest JSON under outputs_dir.  Optional SVG plots are
// best-effort and never fail the run.  Configuration and I/O errors throw
// with the scenario id in the message; per-rung solver errors are recorded in
// the manifest and the run continues.
RunManifest run_scenario(const Scenario& s);

// ---------------------------------------------------------------------------
// Collapsing-family experiment: backgrounds beta_t = t * Theta for t in
// (0, 1], all dominated by Theta, with the base solve at t = 1.  One
// certificate is computed from the budget of the dominating background and
// must bound every member's oscillation.
// ---------------------------------------------------------------------------

struct FamilyResult {
    double t = 0.0;
    bool solved = false;
    double oscillation = 0.0;
    double normalized_oscillation = 0.0; // oscillation / t (scale-invariant)
    bool theta_psh = false; // the member passes the Theta-psh cone test
    std::string error;
};

struct FamilyReport {
    std::vector<FamilyResult> results;
    BoundCertificate certificate; // uniform bound from the Theta budget
    double max_oscillation = 0.0;
    double oscillation_spread = 0.0; // (max - min) / max over solved members
    bool bound_holds = false;    // max oscillation <= certificate.T
    bool containment_ok = false; // every solved member is Theta-psh

    std::string to_json() const;
};

// Solves V_t^{-1} (beta_t + dd^c phi_t)^n = mu for each t with
// beta_t = t * Theta and asserts the single certificate built from the
// raw-moment budget am_raw of the pair (Theta, mu).  Requires every t in
// (0, 1].  Per-t solver failures are recorded and the run continues.
FamilyReport family_experiment(const std::vector<double>& t_values,
                               const HermitianBackground& Theta,
                               const GridMeasure& mu, double m, double am_raw,
                               const SolveConfig& cfg = {});

// ---------------------------------------------------------------------------
// Stability experiment: how far competitors can rise above the solved
// potential, measured against the certificate pair (T, tau) with
//     sup (phihat - phi)_+  <=  T * (integral (phihat - phi)_+ dmu)^tau.
// ---------------------------------------------------------------------------

struct StabilityPoint {
    double mass = 0.0;       // integral of the positive part against mu
    double sup_defect = 0.0; // sup of the positive part
    double bound = 0.0;      // T * mass^tau
    bool holds = false;
};

struct StabilityReport {
    BoundCertificate certificate; // stability mode, reference sup over the family
    double tau = 0.0;
    std::vector<StabilityPoint> points;
    double fitted_rate = 0.0;    // log-log slope of sup_defect against mass
    bool rate_estimated = false; // enough interior points for the regression
    bool all_hold = false;

    std::string to_json() const;
};

// Evaluates both sides of the stability inequality for every competitor
// (bounded potentials on phi's grid), using one certificate whose reference
// sup-norm is the largest over the family.  Also fits the empirical decay
// rate of sup against mass on the log-log scatter (points with both sides
// positive).  Writes no files; the CLI emits the scatter CSV.
StabilityReport stability_experiment(const GridFunction& phi, const GridMeasure& mu,
                                     double m, double am_raw,
                                     const std::vector<GridFunction>& competitors);

} // namespace pshlab
