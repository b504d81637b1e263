#include "pshlab/acceptance.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pshlab/bound_engine.hpp"
#include "pshlab/envelope.hpp"
#include "pshlab/errors.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/hessian.hpp"
#include "pshlab/ma_solver.hpp"
#include "pshlab/measures.hpp"
#include "pshlab/scenario.hpp"
#include "pshlab/weight_chi.hpp"

namespace pshlab {
namespace {

constexpr double kTau = 2.0 * M_PI;

std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Smooth random field: a handful of low trigonometric modes with random
// phases, the same family in one and two complex dimensions.
GridFunction random_trig(const PeriodicGrid& g, std::mt19937_64& rng, double amp) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double c[6], p[6];
    for (int k = 0; k < 6; ++k) {
        c[k] = d(rng);
        p[k] = d(rng);
    }
    if (g.n() == 1) {
        return GridFunction::sample(g, [&](const std::array<double, 4>& x) {
            return amp * (c[0] * std::cos(kTau * x[0] + p[0]) +
                          c[1] * std::sin(kTau * x[1] + p[1]) +
                          c[2] * std::cos(kTau * (x[0] + x[1]) + p[2]));
        });
    }
    return GridFunction::sample(g, [&](const std::array<double, 4>& x) {
        return amp * (c[0] * std::cos(kTau * x[0] + p[0]) + c[1] * std::sin(kTau * x[1] + p[1]) +
                      c[2] * std::cos(kTau * x[2] + p[2]) + c[3] * std::sin(kTau * x[3] + p[3]) +
                      c[4] * std::cos(kTau * (x[0] + x[2]) + p[4]) +
                      c[5] * std::cos(kTau * (x[1] + x[3]) + p[5]));
    });
}

// Random field rescaled into the background-psh cone with an eigenvalue
// margin: lambda_min(beta + s H) >= (1-s) lambda_min(beta) + s lambda_min(beta+H)
// by concavity, and the standard background has unit eigenvalues.
GridFunction make_psh(const PeriodicGrid& g, const HermitianBackground& bg,
                      std::mt19937_64& rng, double amp, double margin) {
    GridFunction w = random_trig(g, rng, amp);
    const PshReport rep = is_omega_psh(w, bg, 1e300);
    double s = 1.0;
    if (rep.worst_lambda_min < margin) s = (1.0 - margin) / (1.0 - rep.worst_lambda_min);
    GridFunction u(g, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = s * w[i];
    return u;
}

template <typename F>
double rk4_step(const F& f, double x, double y, double step) {
    const double k1 = f(x, y);
    const double k2 = f(x + 0.5 * step, y + 0.5 * step * k1);
    const double k3 = f(x + 0.5 * step, y + 0.5 * step * k2);
    const double k4 = f(x + step, y + step * k3);
    return y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Independent blow-up horizon for h' = (1 + h^alpha/(alpha A (1+t)^2))^(1/beta),
// h(0) = 0: phase one integrates the inverse function t(h) up to h = 2 with
// fixed-step RK4; phase two substitutes w = h^(-kappa), kappa =
// (alpha-beta)/beta, under which dt/dw stays bounded and smooth down to
// w = 0 — exactly the blow-up point — so a uniform mesh reaches the horizon.
double ode_horizon_oracle(double alpha, double beta, double A) {
    const auto slope = [&](double t, double h) {
        const double lift = 1.0 + t;
        return std::pow(1.0 + std::pow(h, alpha) / (alpha * A * lift * lift), 1.0 / beta);
    };
    double t = 0.0;
    {
        const int steps = 20000;
        const double dh = 2.0 / steps;
        double h = 0.0;
        const auto inverse = [&](double hh, double tt) { return 1.0 / slope(tt, hh); };
        for (int i = 0; i < steps; ++i) {
            t = rk4_step(inverse, h, t, dh);
            h += dh;
        }
    }
    const double kappa = (alpha - beta) / beta;
    const double w_top = std::pow(2.0, -kappa);
    const auto tail = [&](double s, double tt) {
        const double w = w_top - s;
        const double lift = 1.0 + tt;
        const double at_limit = std::pow(alpha * A * lift * lift, 1.0 / beta) / kappa;
        if (w <= 0.0) return at_limit;
        const double log_h = -std::log(w) / kappa;
        const double big = alpha * log_h - std::log(alpha * A * lift * lift);
        if (big > 500.0) return at_limit;
        const double log_slope = std::log1p(std::exp(big)) / beta;
        return std::exp((1.0 + kappa) * log_h - log_slope) / kappa;
    };
    const int steps = 40000;
    const double ds = w_top / steps;
    double s = 0.0;
    for (int i = 0; i < steps; ++i) {
        t = rk4_step(tail, s, t, ds);
        s += ds;
    }
    return t;
}

// ---------------------------------------------------------------------------
// A1 — manufactured smooth solution: solver accuracy and convergence order.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a1(const std::string&) {
    AcceptanceResult r;
    const HermitianBackground bg = HermitianBackground::standard(1, 1.0, 2.0);
    double err[2] = {0.0, 0.0};
    int k = 0;
    for (int res : {128, 256}) {
        PeriodicGrid g(1, res);
        const ManufacturedInstance mi = manufactured_instance(
            ManufacturedKind::sine, 0.05, g, bg, ManufacturedFlavor::continuum);
        const TorusSolution sol = solve_torus(mi.mu, bg, {});
        err[k++] = sup_diff(sol.phi, mi.phi_star);
    }
    const double ratio = err[0] / std::max(err[1], 1e-300);
    r.pass = err[0] <= 1e-4 && ratio >= 3.5;
    r.detail = fmt("sup error %.3e at res 128 (limit 1e-4); doubling the resolution "
                   "reduced it %.2fx (needs >= 3.5)",
                   err[0], ratio);
    return r;
}

// ---------------------------------------------------------------------------
// A2 — envelope: residual MA mass off the contact set, idempotence and
// monotonicity over randomized obstacles.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a2(const std::string&) {
    AcceptanceResult r;
    const HermitianBackground bg = HermitianBackground::standard(1, 1.0, 2.0);
    PeriodicGrid g(1, 256);
    const GridFunction h = GridFunction::sample(g, [](const std::array<double, 4>& x) {
        return std::min(0.0, 0.25 - 0.5 * std::cos(kTau * x[0]));
    });
    const EnvelopeResult er = psh_envelope(h, bg, {});
    const OrthogonalityReport orep = orthogonality_report(er, bg);
    const bool off_ok = er.converged && orep.off_contact_mass_fraction <= 1e-3;

    PeriodicGrid g48(1, 48);
    std::mt19937_64 rng(90210);
    std::uniform_real_distribution<double> lift(0.0, 0.5);
    double worst_idem = 0.0, worst_mono = 0.0;
    for (int pair = 0; pair < 25; ++pair) {
        const GridFunction h1 = random_trig(g48, rng, 0.8);
        const GridFunction gap = random_trig(g48, rng, 0.3);
        GridFunction h2(g48, 0.0);
        const double c = lift(rng);
        for (std::size_t i = 0; i < h1.size(); ++i) h2[i] = h1[i] + std::abs(gap[i]) + c;
        const EnvelopeResult r1 = psh_envelope(h1, bg, {});
        const EnvelopeResult r2 = psh_envelope(h2, bg, {});
        const EnvelopeResult rr = psh_envelope(r1.u, bg, {});
        worst_idem = std::max(worst_idem, sup_diff(rr.u, r1.u));
        for (std::size_t i = 0; i < h1.size(); ++i)
            worst_mono = std::max(worst_mono, r1.u[i] - r2.u[i]);
    }
    const bool idem_ok = worst_idem <= 1e-8;
    const bool mono_ok = worst_mono <= 1e-9;
    r.pass = off_ok && idem_ok && mono_ok;
    r.detail = fmt("off-contact mass fraction %.3e (limit 1e-3); over 50 random obstacles "
                   "worst idempotence drift %.2e (limit 1e-8), worst monotonicity "
                   "violation %.2e (limit 1e-9)",
                   orep.off_contact_mass_fraction, worst_idem, worst_mono);
    return r;
}

// ---------------------------------------------------------------------------
// A3 — certificate soundness on a singular density across a resolution ladder,
// with the full self-consistency chain.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a3(const std::string& scratch) {
    AcceptanceResult r;
    Scenario sc;
    sc.id = "a3";
    sc.model = "torus";
    sc.n = 1;
    auto d = std::make_shared<DensitySpec>();
    d->kind = "lp-singular";
    d->centers = {{0.5, 0.5, 0.0, 0.0}};
    d->strengths = {1.0};
    d->p = 1.5;
    sc.density_inline = d;
    sc.resolutions = {64, 128, 256};
    sc.bound_mode = "uniform";
    sc.m = 4.0;
    sc.am_source = "estimate";
    sc.outputs_dir = scratch + "/a3";
    const RunManifest man = run_scenario(sc);

    bool all_solved = !man.results.empty();
    double max_osc = 0.0;
    for (const ResolutionResult& rr : man.results) {
        all_solved = all_solved && rr.solved;
        max_osc = std::max(max_osc, rr.oscillation);
    }
    bool chain = !man.self_consistency.empty();
    for (const TraceRow& row : man.self_consistency) chain = chain && row.pass;
    r.pass = all_solved && man.certificate_built && man.am_is_heuristic && man.bound_holds &&
             chain && man.pass();
    r.detail = fmt("max oscillation %.4f vs certificate T %.4f over res {64,128,256}; "
                   "moment budget %.3e (heuristic %s); self-consistency rows %zu all %s",
                   max_osc, man.certificate.T, man.am_raw,
                   man.am_is_heuristic ? "yes" : "no", man.self_consistency.size(),
                   chain ? "pass" : "FAIL");
    return r;
}

// ---------------------------------------------------------------------------
// A4 — weighted-envelope contact inequality over randomized psh pairs.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a4(const std::string&) {
    AcceptanceResult r;
    const HermitianBackground bg = HermitianBackground::standard(1, 1.0, 2.0);
    PeriodicGrid g(1, 64);
    std::mt19937_64 rng(424242);
    const WeightChi chi = WeightChi::truncated_log(0.5);
    bool all_ok = true;
    double worst_ratio = 0.0, worst_excess = -1e300;
    std::size_t contacts = 0;
    for (int pair = 0; pair < 20; ++pair) {
        const GridFunction phihat = make_psh(g, bg, rng, 0.4, 0.05);
        const GridFunction u0 = make_psh(g, bg, rng, 0.4, 0.05);
        double c = -1e300;
        for (std::size_t i = 0; i < u0.size(); ++i) c = std::max(c, u0[i] - phihat[i]);
        GridFunction phi(g, 0.0);
        for (std::size_t i = 0; i < u0.size(); ++i) phi[i] = u0[i] - c;
        const KeyLemmaReport rep = key_lemma_check(phi, phihat, chi, bg, 1e-6);
        all_ok = all_ok && rep.pass && rep.contact_count >= 1;
        worst_ratio = std::max(worst_ratio, rep.worst_ratio);
        worst_excess = std::max(worst_excess, rep.worst_excess);
        contacts += rep.contact_count;
    }
    r.pass = all_ok && worst_ratio <= 1.0 + 1e-6;
    r.detail = fmt("20 random pairs, %zu contact nodes total: worst density ratio %.9f "
                   "(limit 1 + 1e-6), worst excess %.2e",
                   contacts, worst_ratio, worst_excess);
    return r;
}

// ---------------------------------------------------------------------------
// A5 — scaled-background family under one certificate.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a5(const std::string&) {
    AcceptanceResult r;
    const HermitianBackground theta = HermitianBackground::standard(1, 1.0, 2.0);
    PeriodicGrid g(1, 64);
    DensitySpec d;
    d.kind = "manufactured";
    d.amplitude = 0.3;
    const GridMeasure mu = build_density(d, g, theta);
    const TorusSolution base = solve_torus(mu, theta, {});
    const AmEstimate est = estimate_Am(mu, 4.0, {base.phi});
    const double root = est.upper_available ? est.upper_heuristic : est.lower;
    const double raw = std::max(std::pow(root, 4.0), std::numeric_limits<double>::min());
    const FamilyReport rep =
        family_experiment({1.0, 0.5, 0.25, 0.125}, theta, mu, 4.0, raw, {});
    bool solved_all = !rep.results.empty();
    for (const FamilyResult& fr : rep.results) solved_all = solved_all && fr.solved;
    const bool spread_ok = rep.oscillation_spread < 0.5;
    r.pass = solved_all && rep.bound_holds && rep.containment_ok && spread_ok;
    r.detail = fmt("one certificate T %.4f bounds all oscillations (max %.4f): %s; "
                   "cone containment: %s; oscillation spread %.1f%% (criterion < 50%%): %s "
                   "— scaling the background by t rescales the solution to t*phi exactly, "
                   "so the spread across t in {1,...,1/8} is 87.5%% by construction",
                   rep.certificate.T, rep.max_oscillation, rep.bound_holds ? "yes" : "NO",
                   rep.containment_ok ? "yes" : "NO", 100.0 * rep.oscillation_spread,
                   spread_ok ? "yes" : "NO");
    return r;
}

// ---------------------------------------------------------------------------
// A6 — exponentially singular density: relative bound against the log-model
// weight, masked minima stable under refinement while the global minimum
// keeps falling.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a6(const std::string&) {
    AcceptanceResult r;
    const HermitianBackground bg = HermitianBackground::standard(1, 1.0, 2.0);
    DensitySpec gs;
    gs.kind = "manufactured";
    gs.amplitude = 0.3;
    DensitySpec d;
    d.kind = "exp-singular";
    d.centers = {{0.5, 0.5, 0.0, 0.0}};
    d.strengths = {3.0};
    d.q = 2.0;
    d.g_factor = std::make_shared<DensitySpec>(gs);
    SolveConfig cfg;
    cfg.continuity_steps = 8;

    struct Level {
        int res = 0;
        GridFunction phi;
    };
    std::vector<Level> lv;
    for (int res : {64, 128}) {
        PeriodicGrid g(1, res);
        const GridMeasure mu = build_density(d, g, bg);
        const TorusSolution sol = solve_torus(mu, bg, cfg);
        lv.push_back({res, sol.phi});
    }
    const std::vector<LelongDatum> pole = {LelongDatum{{0.5, 0.5, 0.0, 0.0}, 3.0}};

    // emit (alpha, beta) from the coarse level: the slope needed over the deep
    // region {psi <= -1} plus slack, then the matching offset plus margin
    double alpha = 0.0;
    {
        PeriodicGrid g(1, lv[0].res);
        QuasiPshWeight w(g, pole, bg);
        const GridFunction& psi = w.values();
        double need = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i)
            if (psi[i] <= -1.0) need = std::max(need, lv[0].phi[i] / psi[i]);
        alpha = 1.15 * need;
    }
    double beta = 0.0;
    {
        PeriodicGrid g(1, lv[0].res);
        QuasiPshWeight w(g, pole, bg);
        const GridFunction& psi = w.values();
        for (std::size_t i = 0; i < psi.size(); ++i)
            beta = std::max(beta, alpha * psi[i] - lv[0].phi[i]);
        beta += 0.05;
    }

    std::vector<RelativeBoundReport> rel;
    for (const Level& L : lv) {
        PeriodicGrid g(1, L.res);
        QuasiPshWeight w(g, pole, bg);
        rel.push_back(relative_bound_check(L.phi, w, alpha, beta, 2.0, 8));
    }
    // the same physical mask radius at both levels: 4 cells of the coarse grid
    const double mask64 = rel[0].min_phi_at_distance[4];
    const double mask128 = rel[1].min_phi_at_distance[8];
    const bool stable = std::abs(mask128 - mask64) <= 0.10 * std::abs(mask64);
    const bool deeper = rel[1].min_phi_global < rel[0].min_phi_global;
    r.pass = alpha > 0.0 && std::isfinite(beta) && rel[0].singular_nodes >= 1 &&
             rel[0].lower_bound_holds && rel[1].lower_bound_holds && stable && deeper;
    r.detail = fmt("emitted alpha %.4f, beta %.4f: lower bound holds at res 64 "
                   "(margin %.3f) and res 128 (margin %.3f); masked min %.4f -> %.4f "
                   "under doubling (drift %.1f%%, limit 10%%) while the global min "
                   "falls %.4f -> %.4f",
                   alpha, beta, rel[0].worst_margin, rel[1].worst_margin, mask64, mask128,
                   100.0 * std::abs(mask128 - mask64) / std::abs(mask64),
                   rel[0].min_phi_global, rel[1].min_phi_global);
    return r;
}

// ---------------------------------------------------------------------------
// A7 — radial Dirichlet solver: sup bounds from quadrature moment budgets and
// cross-validation against an independent four-dimensional grid solve.
// ---------------------------------------------------------------------------

// moment of (-u)^m against f d(vol), normalized, by midpoint quadrature in
// log r plus the innermost disk
double radial_moment(const RadialProfile& p, double m, int n,
                     const std::function<double(double)>& f) {
    const double sigma = (n == 1) ? 2.0 * M_PI : 2.0 * M_PI * M_PI;
    const double r0 = p.radii.front();
    const int steps = 20000;
    const double ds = std::log(1.0 / r0) / steps;
    double mom = 0.0, mass = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double rr = r0 * std::exp((i + 0.5) * ds);
        const double w = f(rr) * sigma * std::pow(rr, 2 * n) * ds;
        mass += w;
        mom += std::pow(std::max(0.0, -p.value_at(rr)), m) * w;
    }
    const double vol0 = ((n == 1) ? M_PI : M_PI * M_PI / 2.0) * std::pow(r0, 2 * n);
    const double w0 = f(r0) * vol0;
    mass += w0;
    mom += std::pow(std::max(0.0, -p.value_at(r0)), m) * w0;
    return mom / mass;
}

// Independent check of the radial reduction: solve det(kappa Hc u) = 1 on the
// unit ball of C^2 (coordinates (x1,y1,x2,y2), kappa = 2, u = 0 on the
// sphere) on a uniform 4-D grid with boundary-shortened second-difference
// arms, by nonlinear Gauss-Seidel on the concave root of the pointwise
// quadratic, and report the worst bulk (r <= 0.9) gap to the radial profile.
double fd_ball_cross_check(const RadialProfile& prof, int N) {
    const double h = 2.0 / (N - 1);
    const double kappa = 2.0;
    std::vector<double> u(static_cast<std::size_t>(N) * N * N * N, 0.0);
    const auto idx = [&](int a, int b, int c, int dd) {
        return ((static_cast<std::size_t>(a) * N + b) * N + c) * N + dd;
    };
    const auto coord = [&](int k) { return -1.0 + k * h; };
    const auto rad2 = [&](int a, int b, int c, int dd) {
        const double x0 = coord(a), x1 = coord(b), x2 = coord(c), x3 = coord(dd);
        return x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3;
    };
    const double rb2 = (1.0 - 1e-12) * (1.0 - 1e-12);
    double delta = 1e300;
    for (int sweep = 0; sweep < 30000 && delta > 1e-13; ++sweep) {
        delta = 0.0;
        for (int a = 1; a < N - 1; ++a)
            for (int b = 1; b < N - 1; ++b)
                for (int c = 1; c < N - 1; ++c)
                    for (int dd = 1; dd < N - 1; ++dd) {
                        const double r2 = rad2(a, b, c, dd);
                        if (r2 >= rb2) continue;
                        const double x[4] = {coord(a), coord(b), coord(c), coord(dd)};
                        double A[4], B[4];
                        for (int ax = 0; ax < 4; ++ax) {
                            int kp[4] = {a, b, c, dd}, km[4] = {a, b, c, dd};
                            ++kp[ax];
                            --km[ax];
                            const double root =
                                std::sqrt(std::max(0.0, x[ax] * x[ax] + 1.0 - r2));
                            double tp = 1.0, tm = 1.0, up = 0.0, um = 0.0;
                            if (rad2(kp[0], kp[1], kp[2], kp[3]) >= rb2)
                                tp = (-x[ax] + root) / h;
                            else
                                up = u[idx(kp[0], kp[1], kp[2], kp[3])];
                            if (rad2(km[0], km[1], km[2], km[3]) >= rb2)
                                tm = (x[ax] + root) / h;
                            else
                                um = u[idx(km[0], km[1], km[2], km[3])];
                            A[ax] = 2.0 / (h * h) *
                                    (up / (tp * (tp + tm)) + um / (tm * (tp + tm)));
                            B[ax] = 2.0 / (h * h * tp * tm);
                        }
                        const auto cross = [&](int ax, int ay) {
                            int pp[4] = {a, b, c, dd}, mm[4] = {a, b, c, dd};
                            int pm[4] = {a, b, c, dd}, mp[4] = {a, b, c, dd};
                            ++pp[ax];
                            ++pp[ay];
                            --mm[ax];
                            --mm[ay];
                            ++pm[ax];
                            --pm[ay];
                            --mp[ax];
                            ++mp[ay];
                            if (rad2(pp[0], pp[1], pp[2], pp[3]) >= rb2 ||
                                rad2(mm[0], mm[1], mm[2], mm[3]) >= rb2 ||
                                rad2(pm[0], pm[1], pm[2], pm[3]) >= rb2 ||
                                rad2(mp[0], mp[1], mp[2], mp[3]) >= rb2)
                                return 0.0;
                            return (u[idx(pp[0], pp[1], pp[2], pp[3])] +
                                    u[idx(mm[0], mm[1], mm[2], mm[3])] -
                                    u[idx(pm[0], pm[1], pm[2], pm[3])] -
                                    u[idx(mp[0], mp[1], mp[2], mp[3])]) /
                                   (4.0 * h * h);
                        };
                        const double re12 = (kappa / 4.0) * (cross(0, 2) + cross(1, 3));
                        const double im12 = (kappa / 4.0) * (cross(0, 3) - cross(1, 2));
                        const double P1 = (kappa / 4.0) * (A[0] + A[1]);
                        const double Q1 = (kappa / 4.0) * (B[0] + B[1]);
                        const double P2 = (kappa / 4.0) * (A[2] + A[3]);
                        const double Q2 = (kappa / 4.0) * (B[2] + B[3]);
                        const double m2 = re12 * re12 + im12 * im12;
                        const double disc = (P1 * Q2 - P2 * Q1) * (P1 * Q2 - P2 * Q1) +
                                            4.0 * Q1 * Q2 * (m2 + 1.0);
                        const double unew =
                            ((P1 * Q2 + P2 * Q1) - std::sqrt(disc)) / (2.0 * Q1 * Q2);
                        const std::size_t id = idx(a, b, c, dd);
                        delta = std::max(delta, std::abs(unew - u[id]));
                        u[id] = unew;
                    }
    }
    double err = 0.0;
    for (int a = 1; a < N - 1; ++a)
        for (int b = 1; b < N - 1; ++b)
            for (int c = 1; c < N - 1; ++c)
                for (int dd = 1; dd < N - 1; ++dd) {
                    const double r2 = rad2(a, b, c, dd);
                    if (r2 > 0.81) continue;
                    const double rr = std::max(std::sqrt(r2), 1e-6);
                    err = std::max(err, std::abs(u[idx(a, b, c, dd)] - prof.value_at(rr)));
                }
    return err;
}

AcceptanceResult criterion_a7(const std::string&) {
    AcceptanceResult r;
    // constant density: exact solution (r^2 - 1)/2
    const RadialProfile pc = solve_radial_ball([](double) { return 1.0; }, 2, {}, 800);
    double errc = 0.0;
    for (double rr : {0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0})
        errc = std::max(errc, std::abs(pc.value_at(rr) - 0.5 * (rr * rr - 1.0)));
    const double supc = -pc.v.front();
    const double momc = radial_moment(pc, 4.0, 2, [](double) { return 1.0; });
    const BoundCertificate cc = local_bound(2, 4.0, std::max(1.0, momc));

    // integrable power singularity f = r^-1: exact profile
    // v(r) = -(4/(3 sqrt 3)) (1 - r^(3/2))
    const double cstar = 4.0 / (3.0 * std::sqrt(3.0));
    const RadialProfile ps = solve_radial_ball([](double rr) { return 1.0 / rr; }, 2, {}, 800);
    double errs = 0.0;
    for (double rr : {0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0})
        errs = std::max(errs, std::abs(ps.value_at(rr) + cstar * (1.0 - std::pow(rr, 1.5))));
    const double sups = -ps.v.front();
    const double moms = radial_moment(ps, 4.0, 2, [](double rr) { return 1.0 / rr; });
    const BoundCertificate cs = local_bound(2, 4.0, std::max(1.0, moms));

    const double fd_err = fd_ball_cross_check(pc, 17);

    r.pass = errc <= 1e-3 && supc <= cc.T && errs <= 1e-3 && sups <= cs.T && fd_err <= 1e-2;
    r.detail = fmt("constant: sup %.6f <= T %.4f, profile error %.2e; singular r^-1: "
                   "sup %.6f <= T %.4f, profile error %.2e; independent 4-D grid solve "
                   "agrees to %.2e (limit 1e-2)",
                   supc, cc.T, errc, sups, cs.T, errs, fd_err);
    return r;
}

// ---------------------------------------------------------------------------
// A8 — bound engine vs the independent ODE oracle; exponent identities.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a8(const std::string&) {
    AcceptanceResult r;
    double worst_rel = 0.0;
    int points = 0;
    for (int n : {1, 2})
        for (double gap : {1.5, 3.0, 4.5})
            for (double A : {2.0, 64.0}) {
                const double m = n + gap;
                const double eps = gap / 3.0;
                const double T = integrate_ode_uniform(n, m, A).T;
                const double ref = ode_horizon_oracle(m + 1.0, n + 2.0 * eps + 1.0, A);
                worst_rel = std::max(worst_rel, std::abs(T - ref) / ref);
                ++points;
            }
    for (int n : {1, 2})
        for (double gap : {2.0, 4.0})
            for (double A : {1.5, 8.0}) {
                const double m = n + gap;
                const double T = local_bound(n, m, A).T;
                const double ref = ode_horizon_oracle(m + 1.0, n + 1.0, A);
                worst_rel = std::max(worst_rel, std::abs(T - ref) / ref);
                ++points;
            }
    const bool scan_ok = points == 20 && worst_rel <= 1e-6;

    bool ids_ok = true;
    double worst_id = 0.0;
    const double cfgs[3][4] = {{1, 4.0, 2.0, 1.0}, {2, 5.0, 3.0, 0.5}, {1, 2.5, 1.5, 2.0}};
    for (const auto& cf : cfgs) {
        const int n = static_cast<int>(cf[0]);
        const BoundCertificate cert = stability_bound(n, cf[1], cf[2], cf[3], 1.0);
        const double a = cert.derived_value("a");
        const double b = cert.derived_value("b");
        const double c = cert.derived_value("c");
        const double eps = cert.derived_value("epsilon");
        const double q = cert.derived_value("q");
        const double gam = cert.derived_value("gamma");
        const double alp = cert.derived_value("alpha");
        const double tau = cert.derived_value("tau");
        const double idq = std::abs(q * (b - a) - (eps - a) * (n + b));
        const double idg = std::abs(gam * (n + c) * (n + b) - (c - b) * (n + a));
        worst_id = std::max(worst_id, std::max(idq, idg));
        ids_ok = ids_ok && idq <= 1e-12 * (1.0 + (eps - a) * (n + b)) &&
                 idg <= 1e-12 * (1.0 + (c - b) * (n + a)) && tau == gam / alp &&
                 cert.all_pass();
    }
    r.pass = scan_ok && ids_ok;
    r.detail = fmt("20-point oracle scan worst relative gap %.2e (limit 1e-6); "
                   "exponent identities: worst residual %.2e, tau == gamma/alpha "
                   "bitwise on 3 configurations: %s",
                   worst_rel, worst_id, ids_ok ? "yes" : "NO");
    return r;
}

// ---------------------------------------------------------------------------
// A9 — contact-inequality and domination property suites.
// ---------------------------------------------------------------------------
AcceptanceResult criterion_a9(const std::string&) {
    AcceptanceResult r;
    int dem_pairs = 0, dem_violations = 0;
    double dem_worst = -1e300;
    for (int n = 1; n <= 2; ++n) {
        const int res = (n == 1) ? 48 : 10;
        PeriodicGrid g(n, res);
        const HermitianBackground bg = HermitianBackground::standard(n, 1.0, 2.0);
        std::mt19937_64 rng(1234 + n);
        for (int pair = 0; pair < 25; ++pair) {
            ++dem_pairs;
            const GridFunction psi = make_psh(g, bg, rng, 0.4, 0.05);
            const GridFunction u0 = make_psh(g, bg, rng, 0.4, 0.05);
            double c = -1e300;
            for (std::size_t i = 0; i < u0.size(); ++i) c = std::max(c, u0[i] - psi[i]);
            GridFunction phi(g, 0.0);
            for (std::size_t i = 0; i < u0.size(); ++i) phi[i] = u0[i] - c;
            const GridFunction rhs = ma_density(psi, bg);
            bool violated = false;
            for (int j = 0; j <= n; ++j) {
                const GridFunction lhs = mixed_ma(phi, psi, j, bg);
                for (std::size_t i = 0; i < u0.size(); ++i) {
                    if (psi[i] - phi[i] > 1e-9) continue;
                    dem_worst = std::max(dem_worst, lhs[i] - rhs[i]);
                    if (lhs[i] - rhs[i] > 1e-9) violated = true;
                }
            }
            if (violated) ++dem_violations;
        }
    }

    int dom_pairs = 0, dom_violations = 0;
    double dom_worst = 0.0;
    for (int n = 1; n <= 2; ++n) {
        const int res = (n == 1) ? 64 : 16;
        PeriodicGrid g(n, res);
        const HermitianBackground bg = HermitianBackground::standard(n, 1.0, 2.0);
        std::mt19937_64 rng(777 + n);
        for (int pair = 0; pair < 25; ++pair) {
            ++dom_pairs;
            const GridFunction trig = random_trig(g, rng, 0.5);
            GridFunction h(g, 0.0);
            for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::min(0.0, trig[i]);
            const EnvelopeResult er = psh_envelope(h, bg, {});
            const GridFunction mau = ma_density(er.u, bg);
            const GridFunction v0 = make_psh(g, bg, rng, 0.4, 0.05);
            double c = -1e300;
            std::size_t carrier = 0;
            for (std::size_t i = 0; i < mau.size(); ++i)
                if (mau[i] > 1e-8) {
                    ++carrier;
                    c = std::max(c, v0[i] - er.u[i]);
                }
            if (carrier == 0) {
                ++dom_violations; // a degenerate envelope would void the suite
                continue;
            }
            GridFunction v(g, 0.0);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = v0[i] - c;
            const DominationReport rep = domination_check(er.u, v, bg, 1e-8);
            dom_worst = std::max(dom_worst, rep.worst_global_violation);
            if (!rep.pass) ++dom_violations;
        }
    }
    r.pass = dem_pairs == 50 && dem_violations == 0 && dom_pairs == 50 && dom_violations == 0;
    r.detail = fmt("contact inequality: %d pairs, %d violations, worst excess %.2e "
                   "(tol 1e-9); domination: %d pairs, %d violations, worst global "
                   "rise %.2e (tol 2e-8)",
                   dem_pairs, dem_violations, dem_worst, dom_pairs, dom_violations,
                   dom_worst);
    return r;
}

struct Criterion {
    const char* id;
    AcceptanceResult (*fn)(const std::string&);
    double limit_seconds;
};

constexpr Criterion kCriteria[] = {
    {"A1", &criterion_a1, 60.0},  {"A2", &criterion_a2, 120.0}, {"A3", &criterion_a3, 300.0},
    {"A4", &criterion_a4, 180.0}, {"A5", &criterion_a5, 240.0}, {"A6", &criterion_a6, 180.0},
    {"A7", &criterion_a7, 240.0}, {"A8", &criterion_a8, 10.0},  {"A9", &criterion_a9, 120.0},
};

bool wanted(const char* id, const std::vector<std::string>& only) {
    if (only.empty()) return true;
    for (const std::string& s : only) {
        if (s.size() != 2) continue;
        if (std::toupper(static_cast<unsigned char>(s[0])) == id[0] && s[1] == id[1])
            return true;
    }
    return false;
}

} // namespace

std::vector<AcceptanceResult> run_acceptance(const std::string& scratch_dir,
                                             const std::vector<std::string>& only) {
    std::error_code ec;
    std::filesystem::create_directories(scratch_dir, ec);
    if (ec) throw IoError("cannot create scratch directory " + scratch_dir + ": " + ec.message());
    std::vector<AcceptanceResult> out;
    for (const Criterion& c : kCriteria) {
        if (!wanted(c.id, only)) continue;
        AcceptanceResult res;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            res = c.fn(scratch_dir);
        } catch (const std::exception& e) {
            res.pass = false;
            res.detail = std::string("error: ") + e.what();
        }
        res.id = c.id;
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (res.seconds > c.limit_seconds) {
            res.pass = false;
            res.detail += fmt(" [over time budget: %.1fs > %.0fs]", res.seconds, c.limit_seconds);
        }
        out.push_back(std::move(res));
    }
    return out;
}

std::string format_acceptance_line(const AcceptanceResult& r) {
    return fmt("%s %s  %6.1fs  %s", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
               r.detail.c_str());
}

} // namespace pshlab
