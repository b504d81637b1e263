#include "pshlab/bound_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "json.hpp"

#include "pshlab/errors.hpp"

namespace pshlab {

namespace {

// Hand-off point between adaptive integration and the power-law tail: past
// this height the "+1" inside the slope is far below round-off, so the
// remaining time to blow-up integrates in closed form.
constexpr double kTailHeight = 1e9;

struct OdeParams {
    double alpha = 0.0;
    double beta = 0.0;
    double A = 1.0;
};

// Slope of the extremal equality case h' = (1 + h^alpha/(alpha A (1+t)^2))^(1/beta).
double ode_slope(const OdeParams& p, double t, double h) {
    const double lift = 1.0 + t;
    const double ratio = std::pow(h, p.alpha) / (p.alpha * p.A * lift * lift);
    return std::pow(1.0 + ratio, 1.0 / p.beta);
}

template <typename F>
double rk4_step(const F& f, double x, double y, double step) {
    const double k1 = f(x, y);
    const double k2 = f(x + 0.5 * step, y + 0.5 * step * k1);
    const double k3 = f(x + 0.5 * step, y + 0.5 * step * k2);
    const double k4 = f(x + step, y + step * k3);
    return y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Adaptive RK4 with step doubling and Richardson acceptance.  Advances (x, y)
// until stop(y) fires or x reaches x_end exactly; tol is the relative local
// error target per step.
template <typename F, typename Stop>
void advance(const F& f, double& x, double& y, double x_end, double step0,
             double tol, const Stop& stop, const char* where) {
    double step = step0;
    const bool bounded = std::isfinite(x_end);
    std::size_t iter = 0;
    while (!stop(y) && (!bounded || x < x_end)) {
        if (++iter > 2000000) throw NonConvergence(where, iter, step);
        if (bounded) step = std::min(step, x_end - x);
        const double coarse = rk4_step(f, x, y, step);
        double fine = rk4_step(f, x, y, 0.5 * step);
        fine = rk4_step(f, x + 0.5 * step, fine, 0.5 * step);
        const double err = std::abs(fine - coarse);
        const double scale = tol * (1.0 + std::abs(fine));
        if (err <= scale) {
            x += step;
            y = fine + (fine - coarse) / 15.0;
            const double grow = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 2.0;
            step *= std::clamp(grow, 0.5, 2.0);
        } else {
            step *= std::max(0.1, 0.9 * std::pow(scale / err, 0.25));
        }
        if (!(step > 1e-14 * (1.0 + std::abs(x))))
            throw NonConvergence(where, iter, step);
    }
}

// Comparison-integral cap derived by integrating (1+t)^(-2/beta) <= C h' h^(-alpha/beta)
// from t = 1 (where h >= 1) to the horizon.
double closed_form_horizon(double alpha, double beta, double C) {
    if (beta > 2.0) {
        const double base =
            std::pow(2.0, (beta - 2.0) / beta) + C * (beta - 2.0) / (alpha - beta);
        return std::pow(base, beta / (beta - 2.0)) - 1.0;
    }
    // beta == 2: the left side integrates to a logarithm instead.
    return 2.0 * std::exp(2.0 * C / (alpha - 2.0)) - 1.0;
}

// Blow-up time of the extremal ODE from (0, 0).  Phase 1 steps in t until h
// crosses 1; phase 2 steps t as a function of eta = log h (the slope
// h / h'(t, h) stays tame while h' blows up) until h = kTailHeight; the rest
// integrates exactly in the power-law regime where the "+1" is negligible.
double extremal_horizon(double alpha, double beta, double A) {
    if (!(alpha > beta) || !(beta >= 2.0))
        throw ParameterError("extremal_horizon: needs alpha > beta >= 2");
    if (!(A > 0.0) || !std::isfinite(A))
        throw ParameterError("extremal_horizon: needs a positive finite budget");
    const OdeParams p{alpha, beta, A};

    double t = 0.0;
    double h = 0.0;
    const auto in_t = [&p](double tt, double hh) { return ode_slope(p, tt, hh); };
    advance(in_t, t, h, std::numeric_limits<double>::infinity(), 1e-3, 1e-13,
            [](double hh) { return hh >= 1.0; }, "extremal_horizon ascent");

    double eta = std::log(h);
    const double eta_end = std::log(kTailHeight);
    const auto in_eta = [&p](double ee, double tt) {
        const double hh = std::exp(ee);
        return hh / ode_slope(p, tt, hh);
    };
    advance(in_eta, eta, t, eta_end, 1e-2, 1e-13, [](double) { return false; },
            "extremal_horizon log phase");

    const double h0 = kTailHeight;
    if (beta > 2.0) {
        const double shrink = (beta - 2.0) / beta;
        const double base = std::pow(1.0 + t, shrink) +
                            shrink * std::pow(alpha * A, 1.0 / beta) *
                                (beta / (alpha - beta)) *
                                std::pow(h0, -(alpha - beta) / beta);
        return std::pow(base, 1.0 / shrink) - 1.0;
    }
    const double ex = std::sqrt(alpha * A) * (2.0 / (alpha - 2.0)) *
                      std::pow(h0, -(alpha - 2.0) / 2.0);
    return (1.0 + t) * std::exp(ex) - 1.0;
}

void require_positive_finite(double T, const char* where) {
    if (!(T > 0.0) || !std::isfinite(T)) throw NonConvergence(where, 0, T);
}

} // namespace

bool BoundCertificate::all_pass() const {
    for (const TraceRow& row : trace)
        if (!row.pass) return false;
    return true;
}

double BoundCertificate::derived_value(const std::string& key) const {
    for (const auto& kv : derived)
        if (kv.first == key) return kv.second;
    throw ParameterError("BoundCertificate: unknown derived constant '" + key + "'");
}

std::string BoundCertificate::to_json() const {
    nlohmann::json j;
    j["mode"] = mode;
    j["n"] = n;
    j["m"] = m;
    j["A_m"] = A_m;
    if (mode == "stability") {
        j["phihat_sup"] = phihat_sup;
        j["mass"] = mass;
    }
    nlohmann::json d = nlohmann::json::array();
    for (const auto& kv : derived)
        d.push_back({{"name", kv.first}, {"value", kv.second}});
    j["derived"] = std::move(d);
    j["T"] = T;
    j["bound"] = bound;
    nlohmann::json tr = nlohmann::json::array();
    for (const TraceRow& row : trace)
        tr.push_back({{"id", row.id}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"pass", row.pass}});
    j["trace"] = std::move(tr);
    j["all_pass"] = all_pass();
    return j.dump(2);
}

OdeIntegration integrate_ode_uniform(int n, double m, double Atilde) {
    if (n < 1) throw ParameterError("integrate_ode_uniform: n must be >= 1");
    if (!(m > n)) throw ParameterError("integrate_ode_uniform: requires m > n");
    if (!(Atilde >= 1.0) || !std::isfinite(Atilde))
        throw ParameterError("integrate_ode_uniform: requires Atilde >= 1");

    const double eps = (m - n) / 3.0;
    const double alpha = m + 1.0;
    const double beta = n + 2.0 * eps + 1.0;
    const double C = std::pow(alpha * Atilde, 1.0 / beta);
    const double T = extremal_horizon(alpha, beta, Atilde);
    const double T_closed = closed_form_horizon(alpha, beta, C);

    OdeIntegration out;
    out.T = T;
    out.derived = {{"epsilon", eps},
                   {"alpha", alpha},
                   {"beta", beta},
                   {"C", C},
                   {"T_closed_form", T_closed}};
    out.trace.push_back({"epsilon_positive", 0.0, eps, eps > 0.0});
    out.trace.push_back({"alpha_exceeds_beta", beta, alpha, beta < alpha});
    out.trace.push_back({"beta_exceeds_two", 2.0, beta, 2.0 < beta});
    out.trace.push_back(
        {"horizon_within_closed_form", T, T_closed, T <= T_closed * (1.0 + 1e-9)});
    return out;
}

BoundCertificate uniform_bound(int n, double m, double A_m) {
    if (n < 1) throw ParameterError("uniform_bound: n must be >= 1");
    if (!(m > n)) throw ParameterError("uniform_bound: requires m > n");
    if (!(A_m > 0.0) || !std::isfinite(A_m))
        throw ParameterError("uniform_bound: requires a positive finite A_m");

    const double eps = (m - n) / 3.0;
    const double atilde_raw = (1.0 + std::pow(2.0, 1.0 / eps)) * A_m;
    const double atilde = std::max(1.0, atilde_raw);
    OdeIntegration ode = integrate_ode_uniform(n, m, atilde);

    BoundCertificate cert;
    cert.mode = "uniform";
    cert.n = n;
    cert.m = m;
    cert.A_m = A_m;
    cert.derived.emplace_back("Atilde", atilde);
    cert.derived.emplace_back("Atilde_floored", atilde_raw < 1.0 ? 1.0 : 0.0);
    for (const auto& kv : ode.derived) cert.derived.push_back(kv);
    cert.trace = ode.trace;
    cert.T = ode.T;
    cert.bound = ode.T;
    require_positive_finite(cert.T, "uniform_bound");
    return cert;
}

BoundCertificate local_bound(int n, double m, double A_m) {
    if (n < 1) throw ParameterError("local_bound: n must be >= 1");
    if (!(m > n)) throw ParameterError("local_bound: requires m > n");
    if (!(A_m >= 1.0) || !std::isfinite(A_m))
        throw ParameterError("local_bound: requires A_m >= 1");

    const double alpha = m + 1.0;
    const double beta = n + 1.0;
    const double C = std::pow(alpha * A_m, 1.0 / beta);
    const double T = extremal_horizon(alpha, beta, A_m);
    const double T_closed = closed_form_horizon(alpha, beta, C);

    BoundCertificate cert;
    cert.mode = "local";
    cert.n = n;
    cert.m = m;
    cert.A_m = A_m;
    cert.derived = {{"alpha", alpha},
                    {"beta", beta},
                    {"A_effective", A_m},
                    {"C", C},
                    {"T_closed_form", T_closed},
                    {"tail_normalization_budget", 2.0}};
    cert.trace.push_back({"alpha_exceeds_beta", beta, alpha, beta < alpha});
    cert.trace.push_back(
        {"horizon_within_closed_form", T, T_closed, T <= T_closed * (1.0 + 1e-9)});
    cert.T = T;
    cert.bound = T;
    require_positive_finite(cert.T, "local_bound");
    return cert;
}

BoundCertificate stability_bound(int n, double m, double A_m, double phihat_sup,
                                 double mass) {
    if (n < 1) throw ParameterError("stability_bound: n must be >= 1");
    if (!(m > n)) throw ParameterError("stability_bound: requires m > n");
    if (!(A_m > 0.0) || !std::isfinite(A_m))
        throw ParameterError("stability_bound: requires a positive finite A_m");
    if (!std::isfinite(phihat_sup) || phihat_sup < 0.0)
        throw ParameterError("stability_bound: phihat_sup must be finite and >= 0");
    if (!(mass >= 0.0) || !std::isfinite(mass))
        throw ParameterError("stability_bound: mass must be finite and >= 0");

    const double eps = m - n;
    const double a = eps / 8.0;
    const double b = eps / 4.0;
    const double c = eps / 3.0;
    const double q = (eps - a) * (n + b) / (b - a);
    const double Q = (n + b) * (n + c) / (c - b);
    const double gamma = (c - b) * (n + a) / ((n + c) * (n + b));
    const double alpha = m + 1.0;
    const double beta = n + 2.0 * c + 1.0;
    const double tau = gamma / alpha;

    // Cap on how deep phi can sit below phihat before level sets empty out:
    // the global horizon applied to sup-normalized phi, shifted by ||phihat||.
    BoundCertificate uniform = uniform_bound(n, m, A_m);
    const double t_cap = phihat_sup + uniform.T;
    const double B = 1.0 + t_cap;
    // Moment surrogate for the gap (phihat - envelope) in L^q(mu); the true
    // compactness constant is not computable from (n, m, A_m) alone, so the
    // certificate carries this documented stand-in.
    const double S_q = 2.0 * phihat_sup + std::pow(1.0 + t_cap, beta / (n + 2.0 * c));
    const double C1 =
        std::pow(t_cap, (Q - 1.0) * gamma) * std::pow(S_q, q * (b - a) / (n + b));
    const double C2 = C1 * std::pow(B, (n + a) / (n + c));
    const double C3 = alpha * (n + 2.0 * c) * C2 / beta;
    const double C4 = std::pow(C3, 1.0 / beta);
    // J = integral over x >= 0 of (x^alpha + 1)^(-1/beta), finite since
    // alpha > beta; Beta-function closed form via log-gamma.
    const double J = std::exp(std::lgamma(1.0 / alpha) +
                              std::lgamma(1.0 / beta - 1.0 / alpha) -
                              std::lgamma(1.0 / beta)) /
                     alpha;
    const double C5 = std::pow(C3, 1.0 / alpha) * J;
    const double delta = mass > 0.0 ? std::pow(mass, gamma) : 0.0;

    BoundCertificate cert;
    cert.mode = "stability";
    cert.n = n;
    cert.m = m;
    cert.A_m = A_m;
    cert.phihat_sup = phihat_sup;
    cert.mass = mass;
    cert.derived = {{"epsilon", eps},
                    {"a", a},
                    {"b", b},
                    {"c", c},
                    {"q", q},
                    {"q_below_m", q < m ? 1.0 : 0.0},
                    {"Q", Q},
                    {"gamma", gamma},
                    {"alpha", alpha},
                    {"beta", beta},
                    {"tau", tau},
                    {"uniform_horizon", uniform.T},
                    {"Tmax_cap", t_cap},
                    {"B", B},
                    {"S_q_surrogate", S_q},
                    {"C1", C1},
                    {"C2", C2},
                    {"C3", C3},
                    {"C4", C4},
                    {"J", J},
                    {"C5", C5},
                    {"delta", delta}};

    const double id_q = std::abs(q * (b - a) - (eps - a) * (n + b));
    const double id_q_scale = 1e-12 * (1.0 + (eps - a) * (n + b));
    const double id_gamma = std::abs(gamma * (n + c) * (n + b) - (c - b) * (n + a));
    const double id_gamma_scale = 1e-12 * (1.0 + (c - b) * (n + a));
    const double id_h1 = std::abs((n + a) + (b - a) - (n + b));
    const double id_h2 = std::abs((n + b) + (c - b) - (n + c));
    const double id_scale = 1e-12 * (1.0 + n + eps);

    cert.trace.push_back({"exponents_ordered_a_b", a, b, a < b});
    cert.trace.push_back({"exponents_ordered_b_c", b, c, b < c});
    cert.trace.push_back({"exponents_ordered_2c_eps", 2.0 * c, eps, 2.0 * c < eps});
    cert.trace.push_back({"exponent_identity_q", id_q, id_q_scale, id_q <= id_q_scale});
    cert.trace.push_back(
        {"exponent_identity_gamma", id_gamma, id_gamma_scale, id_gamma <= id_gamma_scale});
    cert.trace.push_back({"holder_conjugate_first", id_h1, id_scale, id_h1 <= id_scale});
    cert.trace.push_back({"holder_conjugate_second", id_h2, id_scale, id_h2 <= id_scale});
    cert.trace.push_back({"beta_below_alpha", beta, alpha, beta < alpha});
    cert.trace.push_back({"gamma_below_one", gamma, 1.0, gamma < 1.0});
    cert.trace.push_back({"tau_unit_interval", tau, 1.0, tau > 0.0 && tau < 1.0});

    cert.T = C5;
    cert.bound = mass > 0.0 ? C5 * std::pow(mass, tau) : 0.0;
    if (mass == 0.0)
        cert.trace.push_back({"zero_mass_degenerate", cert.bound, 0.0, cert.bound <= 0.0});
    require_positive_finite(cert.T, "stability_bound");
    return cert;
}

AmEstimate estimate_Am(const GridMeasure& mu, double m,
                       const std::vector<GridFunction>& candidates,
                       const std::optional<HolderInput>& holder, double safety) {
    if (candidates.empty())
        throw EmptyCandidates("estimate_Am: no candidate weights supplied");
    if (!(m >= 1.0)) throw ParameterError("estimate_Am: requires m >= 1");
    if (!(safety > 0.0)) throw ParameterError("estimate_Am: safety factor must be positive");

    double qm = 0.0;
    std::size_t vol_limit = candidates.size();
    if (holder) {
        if (!(holder->p > 1.0))
            throw ParameterError("estimate_Am: integrability exponent p must exceed 1");
        if (!(holder->f_norm_p >= 0.0) || !std::isfinite(holder->f_norm_p))
            throw ParameterError("estimate_Am: density norm must be finite and >= 0");
        qm = holder->p / (holder->p - 1.0) * m;
        if (holder->skoda_samples > 0)
            vol_limit = std::min(vol_limit,
                                 static_cast<std::size_t>(holder->skoda_samples));
    }

    const PeriodicGrid& grid = mu.grid();
    const std::size_t count = mu.size();
    std::vector<double> term(count);
    double best_moment = 0.0;
    double best_volume_moment = 0.0;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const GridFunction& psi = candidates[ci];
        if (!psi.has_grid() || !psi.grid().same_layout(grid))
            throw ParameterError("estimate_Am: candidate grid layout mismatch");
        const double top = psi.max();
        if (std::abs(top) > 1e-8)
            throw NormalizationError("estimate_Am: candidate is not sup-normalized", top);
        for (std::size_t i = 0; i < count; ++i)
            term[i] = std::pow(std::max(0.0, -psi[i]), m) * mu.weight(i);
        best_moment = std::max(best_moment, pairwise_sum(term));
        if (holder && ci < vol_limit) {
            for (std::size_t i = 0; i < count; ++i)
                term[i] = std::pow(std::max(0.0, -psi[i]), qm);
            best_volume_moment = std::max(best_volume_moment, pairwise_sum(term));
        }
    }

    const double cell = grid.cell_volume();
    AmEstimate out;
    out.lower = std::pow(best_moment * cell, 1.0 / m);
    if (holder) {
        out.upper_available = true;
        out.upper_heuristic = std::pow(holder->f_norm_p, 1.0 / m) *
                              std::pow(best_volume_moment * cell, 1.0 / qm) * safety;
    }
    return out;
}

OrliczReport orlicz_check(const GridFunction& f, double m) {
    if (!f.has_grid()) throw ParameterError("orlicz_check: function has no grid");
    if (!(m >= 0.0) || !std::isfinite(m))
        throw ParameterError("orlicz_check: requires m >= 0");
    f.check_finite("orlicz_check input");

    const double cell = f.grid().cell_volume();
    const std::size_t count = f.size();
    const double e = std::exp(1.0);
    std::vector<double> term(count);
    const auto budget = [&](double r) {
        for (std::size_t i = 0; i < count; ++i) {
            const double x = std::max(0.0, f[i]) / r;
            term[i] = x * std::pow(std::log(e + x), m);
        }
        return pairwise_sum(term) * cell;
    };

    OrliczReport rep;
    if (f.max() <= 0.0) {
        rep.norm = 0.0;
        rep.admissible = true;
        return rep;
    }

    double hi = 1.0;
    int guard = 0;
    while (budget(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 4000) {
            rep.norm = std::numeric_limits<double>::infinity();
            rep.admissible = false;
            return rep;
        }
    }
    double lo = 0.5 * hi;
    guard = 0;
    while (budget(lo) <= 1.0 && lo > 1e-300) {
        hi = lo;
        lo *= 0.5;
        if (++guard > 4000) break;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (budget(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    rep.norm = hi;
    rep.admissible = std::isfinite(rep.norm);
    return rep;
}

std::vector<TraceRow> bound_self_consistency(const DistributionFunction& dist,
                                             int n, double m, double A_m) {
    dist.validate();
    if (n < 1) throw ParameterError("bound_self_consistency: n must be >= 1");
    if (!(m > n)) throw ParameterError("bound_self_consistency: requires m > n");
    if (!(A_m > 0.0) || !std::isfinite(A_m))
        throw ParameterError("bound_self_consistency: requires a positive finite A_m");

    const double eps = (m - n) / 3.0;
    const double power = n + 2.0 * eps;
    const double beta = power + 1.0;
    const double T0 = dist.default_T0();
    const WeightChi chi = build_chi(dist, power, T0, ChiMode::uniform);
    const double atilde = (1.0 + std::pow(2.0, 1.0 / eps)) * A_m;
    const ChebyshevBound tail = chebyshev_bound(atilde, chi, m);

    std::vector<TraceRow> rows;
    const WeightChi::InvariantReport inv = chi.check_invariants();
    rows.push_back({"weight_h_at_one", 1.0, inv.h_at_1, inv.h_at_1 >= 1.0 - 1e-12});
    rows.push_back(
        {"weight_convexity", -inv.worst_convexity, 1e-12, inv.worst_convexity >= -1e-12});
    rows.push_back({"uniform_normalization_budget", chi.B_bound(), 2.0,
                    chi.B_bound() <= 2.0 + 1e-12});

    // Raw moment of the reweighted potential from the Lebesgue formula: with
    // F constant on [t_k, t_{k+1}) the integral of m h^{m-1} h' F is exactly
    // F_k * (h^m(t_{k+1}) - h^m(t_k)).  Step interpolation over-estimates the
    // true distribution, so this over-estimates the true moment: checking it
    // against Atilde is conservative, and once it holds the tail bound below
    // follows by Chebyshev.
    double reweighted_moment = 0.0;
    for (std::size_t k = 0; k + 1 < dist.t.size(); ++k) {
        reweighted_moment += dist.F[k] * (std::pow(chi.h(dist.t[k + 1]), m) -
                                          std::pow(chi.h(dist.t[k]), m));
    }
    rows.push_back({"reweighted_moment_within_budget", reweighted_moment,
                    atilde * (1.0 + 1e-9),
                    reweighted_moment <= atilde * (1.0 + 1e-9)});

    // The sampled distribution holds value F[k] on [t_k, t_{k+1}); the tail
    // bound decreases, so checking both interval endpoints covers the interval.
    double worst_excess = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < dist.t.size(); ++k) {
        const double right = k + 1 < dist.t.size() ? dist.t[k + 1] : dist.t[k];
        for (const double tt : {dist.t[k], right}) {
            const double cap = tail(tt);
            if (!std::isfinite(cap)) continue;
            const double excess = dist.F[k] - cap;
            worst_excess = any ? std::max(worst_excess, excess) : excess;
            any = true;
        }
    }
    if (!any) worst_excess = 0.0;
    const double dom_tol = 1e-9 * (1.0 + atilde);
    rows.push_back({"chebyshev_dominates_distribution", worst_excess, dom_tol,
                    worst_excess <= dom_tol});

    // Integrated comparison inequality along the measured weight,
    //   h^{m+1}(t)/(m+1) <= Atilde (1+t)^2 ((beta-1)/beta) ((h')^beta - 1),
    // probed at the construction knots and their midpoints inside [0, T0].
    std::vector<double> probes;
    const std::vector<double>& knots = chi.knots();
    for (std::size_t k = 0; k < knots.size(); ++k) {
        if (knots[k] > T0 * (1.0 + 1e-12)) break;
        if (knots[k] > 0.0) probes.push_back(std::min(knots[k], T0));
        if (k + 1 < knots.size()) {
            const double midpoint = 0.5 * (knots[k] + knots[k + 1]);
            if (midpoint <= T0) probes.push_back(midpoint);
        }
    }
    if (T0 > 0.0) probes.push_back(T0);
    double worst_ratio = 0.0;
    for (const double tt : probes) {
        const double h = chi.h(tt);
        const double hp = chi.hprime(tt);
        const double lhs = std::pow(h, m + 1.0) / (m + 1.0);
        const double rhs = atilde * (1.0 + tt) * (1.0 + tt) * ((beta - 1.0) / beta) *
                           (std::pow(hp, beta) - 1.0);
        if (rhs <= 0.0) {
            if (lhs > 1e-14) worst_ratio = std::max(worst_ratio, 1e9);
            continue;
        }
        worst_ratio = std::max(worst_ratio, lhs / rhs);
    }
    rows.push_back(
        {"ode_chain_measured_h", worst_ratio, 1.0 + 1e-9, worst_ratio <= 1.0 + 1e-9});
    return rows;
}

} // namespace pshlab
