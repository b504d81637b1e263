#include "pshlab/ma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fft_util.hpp"
#include "pshlab/errors.hpp"

namespace pshlab {

namespace {

constexpr double kTau = 2.0 * M_PI;

struct State {
    HessianField H;
    std::vector<double> det;
    double v_disc = 0.0;
    double min_lambda = 0.0;
};

State analyze(const GridFunction& phi, const HermitianBackground& bg) {
    State st;
    st.H = complex_hessian(phi, bg);
    const std::size_t count = phi.size();
    st.det.resize(count);
    st.min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        const Herm M = bg.beta() + st.H.at(i);
        st.det[i] = M.det();
        st.min_lambda = std::min(st.min_lambda, M.lambda_min());
    }
    st.v_disc = pairwise_sum(st.det) * phi.grid().cell_volume();
    return st;
}

double sup_residual(const State& st, const std::vector<double>& rho) {
    double r = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        r = std::max(r, std::abs(st.det[i] / st.v_disc - rho[i]));
    return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
    return pairwise_sum(prod);
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void project_mean_zero(std::vector<double>& v) {
    const double mean = pairwise_sum(v) / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

// Variable-coefficient linearization L(v) = tr((beta+H(phi))^{-1} H(v)),
// evaluated through the inverse field precomputed from the current state.
struct Linearization {
    const PeriodicGrid& grid;
    const HermitianBackground& bg;
    std::vector<Herm> Pinv;  // per-node inverse of beta + H(phi)
    Herm Pbar;               // inverse of the node-average of beta + H(phi)

    Linearization(const GridFunction& phi, const HermitianBackground& bg_, const State& st)
        : grid(phi.grid()), bg(bg_) {
        const std::size_t count = phi.size();
        Pinv.resize(count);
        double m11 = 0.0, m22 = 0.0, m12r = 0.0, m12i = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const Herm M = bg.beta() + st.H.at(i);
            Pinv[i] = M.inverse();
            m11 += M.a11;
            m22 += M.a22;
            m12r += M.a12.real();
            m12i += M.a12.imag();
        }
        const double inv = 1.0 / static_cast<double>(count);
        Herm mean{bg.n(), m11 * inv, m22 * inv, {m12r * inv, m12i * inv}};
        Pbar = mean.inverse();
    }

    std::vector<double> apply(const std::vector<double>& v) const {
        GridFunction vf(grid);
        vf.values() = v;
        HessianField Hv = complex_hessian(vf, bg);
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Herm h = Hv.at(i);
            const Herm& P = Pinv[i];
            if (bg.n() == 1) {
                out[i] = P.a11 * h.a11;
            } else {
                out[i] = P.a11 * h.a11 + P.a22 * h.a22 +
                         2.0 * (P.a12.real() * h.a12.real() + P.a12.imag() * h.a12.imag());
            }
        }
        return out;
    }
};

// Preconditioned BiCGStab for the linearized system; the preconditioner is
// the constant-coefficient solve with the averaged matrix.  All iterates stay
// mean-zero (the preconditioner zeroes the constant mode).
std::vector<double> bicgstab(const Linearization& lin, const detail::TorusSpectral& spectral,
                             const std::vector<double>& rhs, const SolveConfig& cfg) {
    const double kappa = lin.bg.ddc_factor();
    auto A = [&](const std::vector<double>& v) {
        return spectral.constant_coefficient_solve(lin.apply(v), lin.Pbar, kappa);
    };
    std::vector<double> b = spectral.constant_coefficient_solve(rhs, lin.Pbar, kappa);
    const double bnorm = norm2(b);
    std::vector<double> x(b.size(), 0.0);
    if (bnorm == 0.0) return x;

    std::vector<double> r = b, rhat = b;
    std::vector<double> p(b.size(), 0.0), v(b.size(), 0.0);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 0; it < cfg.max_krylov; ++it) {
        const double rho1 = dot(rhat, r);
        if (std::abs(rho1) < 1e-300) break;
        const double beta = (rho1 / rho) * (alpha / omega);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        v = A(p);
        const double rv = dot(rhat, v);
        if (std::abs(rv) < 1e-300) break;
        alpha = rho1 / rv;
        std::vector<double> s(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) <= cfg.krylov_tol * bnorm) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i];
            break;
        }
        std::vector<double> t = A(s);
        const double tt = dot(t, t);
        if (tt < 1e-300) break;
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i] + omega * s[i];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = s[i] - omega * t[i];
        if (norm2(r) <= cfg.krylov_tol * bnorm) break;
        rho = rho1;
    }
    project_mean_zero(x);
    return x;
}

} // namespace

TorusSolution solve_torus(const GridMeasure& mu, const HermitianBackground& bg,
                          const SolveConfig& cfg) {
    const PeriodicGrid& g = mu.grid();
    if (bg.n() != g.n()) throw ParameterError("solve_torus: dimension mismatch");
    if (!(cfg.newton_tol > 0.0)) throw ParameterError("solve_torus: newton_tol must be positive");
    if (cfg.continuity_steps < 1) throw ParameterError("solve_torus: continuity_steps >= 1");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw ParameterError("solve_torus: damping must be in (0, 1]");
    const double mass = mu.total_mass();
    if (std::abs(mass - 1.0) > 1e-6)
        throw NormalizationError("solve_torus requires a probability measure", mass);
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (!(mu.weight(i) > 0.0))
            throw ParameterError("solve_torus: density must be strictly positive "
                                 "(truncate singular data first)");

    const double uniform_density =
        1.0 / (static_cast<double>(g.node_count()) * g.cell_volume());
    detail::TorusSpectral spectral(g);

    GridFunction phi(g, 0.0);
    TorusSolution sol;
    const double kappa = bg.ddc_factor();

    for (int stage = 1; stage <= cfg.continuity_steps; ++stage) {
        const double s = static_cast<double>(stage) / cfg.continuity_steps;
        std::vector<double> rho(g.node_count());
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho[i] = (1.0 - s) * uniform_density + s * mu.weight(i);

        int iter = 0;
        for (;; ++iter) {
            State st = analyze(phi, bg);
            const double resid = sup_residual(st, rho);
            sol.residual_trace.push_back(resid);
            sol.residual = resid;
            sol.v_disc = st.v_disc;
            if (resid <= cfg.newton_tol) break;
            if (iter >= cfg.max_newton)
                throw NonConvergence("solve_torus newton", sol.newton_steps, resid);

            // F_i = log det_i - log(V rho_i); the Newton step solves the
            // linearization in the constant-quotient gauge
            std::vector<double> F(rho.size());
            for (std::size_t i = 0; i < F.size(); ++i)
                F[i] = std::log(st.det[i]) - std::log(st.v_disc * rho[i]);

            std::vector<double> delta;
            if (g.n() == 1) {
                // exact linear solve: H(delta) = (c - F) det, with c the
                // det-weighted mean making the right side sum to zero
                const double c = dot(F, st.det) / pairwise_sum(st.det);
                std::vector<double> rhs(F.size());
                for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = (c - F[i]) * st.det[i];
                delta = spectral.poisson(rhs, kappa);
            } else {
                Linearization lin(phi, bg, st);
                std::vector<double> rhs(F.size());
                for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];
                delta = bicgstab(lin, spectral, rhs, cfg);
            }
            project_mean_zero(delta);

            // damped line search: keep positivity, require residual decrease
            double lam = cfg.damping;
            bool accepted = false;
            double worst_lambda_seen = 0.0;
            bool ever_positive = false;
            GridFunction trial(g);
            while (lam >= 1e-6 * cfg.damping) {
                for (std::size_t i = 0; i < phi.size(); ++i)
                    trial[i] = phi[i] + lam * delta[i];
                project_mean_zero(trial.values());
                State st_try = analyze(trial, bg);
                worst_lambda_seen = st_try.min_lambda;
                if (st_try.min_lambda > 0.0) {
                    ever_positive = true;
                    const double rtry = sup_residual(st_try, rho);
                    if (rtry <= resid * (1.0 - 1e-4 * lam) || rtry <= cfg.newton_tol) {
                        phi = trial;
                        accepted = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if (!accepted) {
                if (!ever_positive)
                    throw LossOfPositivity("solve_torus", worst_lambda_seen);
                throw NonConvergence("solve_torus damping floor", sol.newton_steps,
                                     resid);
            }
            ++sol.newton_steps;
        }
        ++sol.continuity_stages;
    }

    // final gauge
    if (cfg.normalization == SolveConfig::Normalization::sup_zero) {
        const double top = phi.max();
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= top;
    } else {
        project_mean_zero(phi.values());
    }
    sol.phi = std::move(phi);
    return sol;
}

ManufacturedInstance manufactured_instance(ManufacturedKind kind, double amplitude,
                                           const PeriodicGrid& grid,
                                           const HermitianBackground& bg,
                                           ManufacturedFlavor flavor) {
    if (bg.n() != grid.n()) throw ParameterError("manufactured_instance: dimension mismatch");
    if (amplitude < 0.0) throw ParameterError("manufactured_instance: amplitude must be >= 0");

    GridFunction phi(grid, 0.0);
    // continuum diagonal Hessian entries (kappa u_{j jbar}) as closed forms
    std::function<double(const std::array<double, 4>&)> h1_cont, h2_cont;
    const double kappa = bg.ddc_factor();
    const double a = amplitude;

    switch (kind) {
        case ManufacturedKind::flat:
            h1_cont = [](const std::array<double, 4>&) { return 0.0; };
            h2_cont = h1_cont;
            break;
        case ManufacturedKind::sine:
            phi = GridFunction::sample(grid, [&](const std::array<double, 4>& x) {
                return a * std::sin(kTau * x[0]);
            });
            // kappa/4 (d^2/dx1^2) a sin = -kappa pi^2 a sin
            h1_cont = [a, kappa](const std::array<double, 4>& x) {
                return -kappa * M_PI * M_PI * a * std::sin(kTau * x[0]);
            };
            h2_cont = [](const std::array<double, 4>&) { return 0.0; };
            break;
        case ManufacturedKind::two_bump:
            if (grid.n() == 1) {
                phi = GridFunction::sample(grid, [&](const std::array<double, 4>& x) {
                    return a * (std::cos(kTau * x[0]) + 0.7 * std::cos(kTau * x[1]));
                });
                h1_cont = [a, kappa](const std::array<double, 4>& x) {
                    return -kappa * M_PI * M_PI * a *
                           (std::cos(kTau * x[0]) + 0.7 * std::cos(kTau * x[1]));
                };
                h2_cont = [](const std::array<double, 4>&) { return 0.0; };
            } else {
                phi = GridFunction::sample(grid, [&](const std::array<double, 4>& x) {
                    return a * (std::cos(kTau * x[0]) + std::cos(kTau * x[1])) +
                           0.7 * a * (std::cos(kTau * x[2]) + std::cos(kTau * x[3]));
                });
                h1_cont = [a, kappa](const std::array<double, 4>& x) {
                    return -kappa * M_PI * M_PI * a *
                           (std::cos(kTau * x[0]) + std::cos(kTau * x[1]));
                };
                h2_cont = [a, kappa](const std::array<double, 4>& x) {
                    return -kappa * M_PI * M_PI * 0.7 * a *
                           (std::cos(kTau * x[2]) + std::cos(kTau * x[3]));
                };
            }
            break;
    }

    // the discrete field must stay strictly inside the cone
    {
        PshReport rep = is_omega_psh(phi, bg, 0.0);
        if (!rep.psh || rep.worst_lambda_min <= 0.0)
            throw PositivityViolation("manufactured_instance: amplitude " +
                                      std::to_string(amplitude) +
                                      " leaves the positivity cone");
    }

    std::vector<double> weights(grid.node_count());
    if (flavor == ManufacturedFlavor::discrete) {
        GridFunction det = ma_density(phi, bg);
        const double total = pairwise_sum(det.values()) * grid.cell_volume();
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = det[i] / total;
    } else {
        // symbolic continuum density det(beta + diag(h1, h2)) / volume
        const Herm& b = bg.beta();
        std::array<double, 4> x{0, 0, 0, 0};
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const auto c = grid.unpack(i);
            for (int axis = 0; axis < grid.dims(); ++axis) x[axis] = c[axis] * grid.spacing();
            double det;
            if (grid.n() == 1) {
                det = b.a11 + h1_cont(x);
            } else {
                det = (b.a11 + h1_cont(x)) * (b.a22 + h2_cont(x)) - std::norm(b.a12);
            }
            if (!(det > 0.0))
                throw PositivityViolation("manufactured_instance: continuum density "
                                          "not positive at amplitude " +
                                          std::to_string(amplitude));
            weights[i] = det;
        }
    }
    GridMeasure mu(grid, std::move(weights));
    mu.normalize_probability();

    // sup-zero normalization of the reference potential
    const double top = phi.max();
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= top;

    return ManufacturedInstance{std::move(phi), std::move(mu)};
}

namespace {

// 8-point Gauss-Legendre rule on [-1, 1] (positive half; mirror for the rest)
constexpr double kGl8Node[4] = {0.1834346424956498, 0.5255324099163290,
                                0.7966664774136267, 0.9602898564975363};
constexpr double kGl8Weight[4] = {0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};

double radial_sample(const std::function<double(double)>& f, double rho) {
    const double val = f(rho);
    if (!std::isfinite(val) || val < 0.0)
        throw ParameterError("solve_radial_ball: density must be finite and >= 0 "
                             "(value " + std::to_string(val) + " at r = " +
                             std::to_string(rho) + ")");
    return val;
}

// integral of f(rho) rho^(2n-1) over [a, b]
double shell_integral(const std::function<double(double)>& f, int n, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        for (double sgn : {-1.0, 1.0}) {
            const double rho = mid + sgn * half * kGl8Node[k];
            acc += kGl8Weight[k] * radial_sample(f, rho) * std::pow(rho, 2 * n - 1);
        }
    }
    return acc * half;
}

// integral of f(rho) rho^(2n-1) over [0, a] by dyadic pieces [a 2^{-k-1}, a 2^{-k}]
// with Gauss quadrature on each.  For an integrable concentration the piece
// masses decay geometrically toward the origin and the remainder is summed
// from the observed ratio; masses that fail to decay expose a non-integrable
// concentration.
double inner_disk_integral(const std::function<double(double)>& f, int n, double a) {
    double total = 0.0;
    double piece = 0.0, previous = 0.0;
    bool have_previous = false;
    double hi = a;
    for (int k = 0; k < 48; ++k) {
        piece = shell_integral(f, n, 0.5 * hi, hi);
        if (!std::isfinite(total + piece))
            throw NonIntegrable("solve_radial_ball: inner-disk mass overflows");
        total += piece;
        const double floor = 1e-14 * (1.0 + total);
        if (k >= 8 && have_previous && piece > floor && previous > floor &&
            piece > 0.95 * previous)
            throw NonIntegrable(
                "solve_radial_ball: cumulative mass does not settle toward the "
                "origin (piece masses " + std::to_string(previous) + " -> " +
                std::to_string(piece) + ")");
        if (piece < 1e-16 * (total + 1e-300)) break;
        previous = piece;
        have_previous = true;
        hi *= 0.5;
    }
    // continue the observed geometric decay below the last computed piece
    if (have_previous && piece > 0.0 && piece < previous) {
        const double q = piece / previous;
        if (q < 0.95) total += piece * q / (1.0 - q);
    }
    return total;
}

} // namespace

double RadialProfile::value_at(double r) const {
    if (!(r > 0.0)) throw ParameterError("RadialProfile::value_at requires r > 0");
    if (r >= 1.0) return boundary_value;
    const double s = std::log(r);
    const double s0 = std::log(radii.front());
    if (s <= s0) return v.front() - slope.front() * (s0 - s);
    const auto it = std::upper_bound(radii.begin(), radii.end(), r);
    const std::size_t hi = static_cast<std::size_t>(it - radii.begin());
    const std::size_t lo = hi - 1;
    const double sl = std::log(radii[lo]), sh = std::log(radii[hi]);
    const double w = (s - sl) / (sh - sl);
    return (1.0 - w) * v[lo] + w * v[hi];
}

void RadialProfile::validate(double tol) const {
    const std::size_t m = radii.size();
    if (m < 2 || v.size() != m || slope.size() != m)
        throw ParameterError("radial profile: inconsistent mesh sizes");
    if (!(radii.front() > 0.0) || std::abs(radii.back() - 1.0) > 1e-12)
        throw ParameterError("radial profile: mesh must lie in (0, 1] ending at 1");
    if (std::abs(v.back() - boundary_value) > tol || boundary_value != 0.0)
        throw ParameterError("radial profile: boundary value must be 0");
    double prev_slope = -tol;
    for (std::size_t i = 0; i < m; ++i) {
        if (i + 1 < m && !(radii[i] < radii[i + 1]))
            throw ParameterError("radial profile: radii must increase");
        if (slope[i] < -tol || slope[i] < prev_slope - tol)
            throw ParameterError("radial profile: slope must be nonnegative and "
                                 "nondecreasing");
        prev_slope = slope[i];
        if (i + 1 < m && v[i + 1] < v[i] - tol)
            throw ParameterError("radial profile: potential must be nondecreasing");
    }
    // convexity in s: chord slopes must not decrease
    double prev_chord = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double ds = std::log(radii[i + 1]) - std::log(radii[i]);
        const double chord = (v[i + 1] - v[i]) / ds;
        if (chord < prev_chord - tol)
            throw ParameterError("radial profile: potential must be convex in log r");
        prev_chord = chord;
    }
}

RadialProfile solve_radial_ball(const std::function<double(double)>& density, int n,
                                const SolveConfig& cfg, int res, double r_min,
                                double ddc_factor) {
    (void)cfg;  // direct quadrature; no iteration parameters needed
    if (n != 1 && n != 2) throw ParameterError("solve_radial_ball: n must be 1 or 2");
    if (res < 16) throw ParameterError("solve_radial_ball: res must be >= 16");
    if (!(r_min > 0.0 && r_min < 0.5))
        throw ParameterError("solve_radial_ball: r_min must lie in (0, 0.5)");
    if (!(ddc_factor > 0.0)) throw ParameterError("solve_radial_ball: ddc_factor > 0");

    const double sigma = (n == 1) ? 2.0 * M_PI : 2.0 * M_PI * M_PI;  // unit-sphere area
    const double c_n = std::pow(ddc_factor, n) * sigma /
                       (std::pow(2.0, n + 1) * static_cast<double>(n));

    const std::size_t m = static_cast<std::size_t>(res) + 1;
    const double smin = std::log(r_min);
    RadialProfile profile;
    profile.radii.resize(m);
    profile.v.resize(m);
    profile.slope.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = smin * (1.0 - static_cast<double>(i) / static_cast<double>(res));
        profile.radii[i] = std::exp(s);
    }
    profile.radii.back() = 1.0;

    std::vector<double> mass(m);
    mass[0] = sigma * inner_disk_integral(density, n, r_min);
    for (std::size_t i = 0; i + 1 < m; ++i)
        mass[i + 1] = mass[i] +
                      sigma * shell_integral(density, n, profile.radii[i], profile.radii[i + 1]);
    profile.total_mass = mass.back();

    for (std::size_t i = 0; i < m; ++i)
        profile.slope[i] = std::pow(mass[i] / c_n, 1.0 / static_cast<double>(n));

    profile.v.back() = 0.0;
    for (std::size_t i = m - 1; i > 0; --i) {
        const double ds = std::log(profile.radii[i]) - std::log(profile.radii[i - 1]);
        profile.v[i - 1] =
            profile.v[i] - 0.5 * ds * (profile.slope[i] + profile.slope[i - 1]);
    }
    return profile;
}

DominationReport domination_check(const GridFunction& u, const GridFunction& v,
                                  const HermitianBackground& bg, double tol, double mass_tol) {
    if (!u.grid().same_layout(v.grid())) throw ParameterError("domination_check: grid mismatch");
    GridFunction mau = ma_density(u, bg);
    DominationReport rep;
    double worst_hyp = -std::numeric_limits<double>::infinity();
    double worst_glob = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double gap = v[i] - u[i];
        worst_glob = std::max(worst_glob, gap);
        if (mau[i] > mass_tol) {
            ++rep.carrier_count;
            worst_hyp = std::max(worst_hyp, gap - tol);
        }
    }
    rep.worst_hypothesis_violation = rep.carrier_count ? std::max(worst_hyp, 0.0) : 0.0;
    rep.worst_global_violation = std::max(worst_glob, 0.0);
    rep.hypothesis_holds = rep.carrier_count > 0 && worst_hyp <= 0.0;
    rep.pass = rep.hypothesis_holds && rep.worst_global_violation <= 2.0 * tol;
    return rep;
}

} // namespace pshlab
