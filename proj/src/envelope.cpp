#include "pshlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pshlab/errors.hpp"

namespace pshlab {

namespace {

// Flat-index topology with branchy periodic neighbor arithmetic; coordinates
// are carried incrementally through the sweeps so no division is needed.
struct Topo {
    int res = 0;
    int dims = 0;
    std::size_t stride[4] = {0, 0, 0, 0};
    std::size_t extent[4] = {0, 0, 0, 0};

    explicit Topo(const PeriodicGrid& g) : res(g.res()), dims(g.dims()) {
        std::size_t s = 1;
        for (int a = dims - 1; a >= 0; --a) {
            stride[a] = s;
            s *= static_cast<std::size_t>(res);
            extent[a] = stride[a] * static_cast<std::size_t>(res);
        }
    }

    std::size_t up(std::size_t i, int c, int axis) const {
        return c + 1 == res ? i + stride[axis] - extent[axis] : i + stride[axis];
    }
    std::size_t down(std::size_t i, int c, int axis) const {
        return c == 0 ? i - stride[axis] + extent[axis] : i - stride[axis];
    }
};

struct Coords {
    int c[4] = {0, 0, 0, 0};
    void advance(int dims, int res) {
        for (int a = dims - 1; a >= 0; --a) {
            if (++c[a] < res) return;
            c[a] = 0;
        }
    }
};

// Largest admissible center value at node i given frozen neighbors: the node
// constraint beta + H(u) >= 0 is linear in u(i) with coefficient
// -(kappa/s^2) I, so the threshold is (s^2/kappa) lambda_min(C) where C
// collects the background and the neighbor part of the stencil.
struct LocalSolver {
    const Topo& topo;
    const double* u;
    int n;
    double b11, b22, b12re, b12im;
    double kappa;
    double s2;      // spacing^2
    double qdiag;   // kappa / (4 s^2)
    double qmix;    // kappa / (16 s^2)  (kappa/4 times the 1/(4 s^2) stencil)
    double inv_kappa_s2;  // s^2 / kappa

    LocalSolver(const Topo& t, const double* values, const HermitianBackground& bg, double spacing)
        : topo(t), u(values), n(bg.n()) {
        const Herm& b = bg.beta();
        b11 = b.a11;
        b22 = b.a22;
        b12re = b.a12.real();
        b12im = b.a12.imag();
        kappa = bg.ddc_factor();
        s2 = spacing * spacing;
        qdiag = kappa / (4.0 * s2);
        qmix = kappa / (16.0 * s2);
        inv_kappa_s2 = s2 / kappa;
    }

    // lambda_min of the neighbor matrix C at node i (center value excluded)
    double threshold(std::size_t i, const int* c) const {
        const Topo& t = topo;
        const double S1 = u[t.up(i, c[0], 0)] + u[t.down(i, c[0], 0)] + u[t.up(i, c[1], 1)] +
                          u[t.down(i, c[1], 1)];
        if (n == 1) {
            return inv_kappa_s2 * b11 + 0.25 * S1;
        }
        const double S2 = u[t.up(i, c[2], 2)] + u[t.down(i, c[2], 2)] + u[t.up(i, c[3], 3)] +
                          u[t.down(i, c[3], 3)];
        const double C11 = b11 + qdiag * S1;
        const double C22 = b22 + qdiag * S2;

        auto corner4 = [&](int a, int b_) {
            const std::size_t pa = t.up(i, c[a], a), ma = t.down(i, c[a], a);
            return u[t.up(pa, c[b_], b_)] - u[t.down(pa, c[b_], b_)] - u[t.up(ma, c[b_], b_)] +
                   u[t.down(ma, c[b_], b_)];
        };
        const double re = b12re + qmix * (corner4(0, 2) + corner4(1, 3));
        const double im = b12im + qmix * (corner4(0, 3) - corner4(1, 2));

        const double mean = 0.5 * (C11 + C22);
        const double disc =
            std::sqrt(0.25 * (C11 - C22) * (C11 - C22) + re * re + im * im);
        return inv_kappa_s2 * (mean - disc);
    }

    double target(std::size_t i, const int* c, double h_i) const {
        return std::min(h_i, threshold(i, c));
    }
};

// One Gauss-Seidel sweep; returns the largest |target - previous value| seen.
double sweep(std::vector<double>& u, const std::vector<double>& h, const LocalSolver& ls,
             const Topo& topo, double omega, bool monotone_clamp) {
    Coords cc;
    double worst = 0.0;
    const std::size_t count = u.size();
    for (std::size_t i = 0; i < count; ++i) {
        const double tstar = ls.target(i, cc.c, h[i]);
        const double old = u[i];
        worst = std::max(worst, std::abs(tstar - old));
        double next = old + omega * (tstar - old);
        next = std::min(next, h[i]);
        if (monotone_clamp) next = std::min(next, old);
        u[i] = next;
        cc.advance(topo.dims, topo.res);
    }
    return worst;
}

struct FrozenResidual {
    double functional = 0.0;
    double eigen = 0.0;
};

// Complementarity residual with all values frozen (no updates).
FrozenResidual frozen_residual(const std::vector<double>& u, const std::vector<double>& h,
                               const LocalSolver& ls, const Topo& topo) {
    Coords cc;
    FrozenResidual r;
    const double kappa_s2 = 1.0 / ls.inv_kappa_s2;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double thr = ls.threshold(i, cc.c);
        const double func = std::min(h[i], thr) - u[i];
        const double eig = std::min(h[i] - u[i], kappa_s2 * (thr - u[i]));
        r.functional = std::max(r.functional, std::abs(func));
        r.eigen = std::max(r.eigen, std::abs(eig));
        cc.advance(topo.dims, topo.res);
    }
    return r;
}

// Multilinear prolongation from a grid of half the resolution.
GridFunction prolong(const GridFunction& coarse, const PeriodicGrid& fine) {
    const PeriodicGrid& gc = coarse.grid();
    GridFunction out(fine);
    const int dims = fine.dims();
    const int corners = 1 << dims;
    for (std::size_t i = 0; i < fine.node_count(); ++i) {
        const auto cf = fine.unpack(i);
        double acc = 0.0;
        for (int mask = 0; mask < corners; ++mask) {
            double w = 1.0;
            std::array<int, 4> cc = {0, 0, 0, 0};
            for (int a = 0; a < dims; ++a) {
                const int base = cf[a] / 2;
                const bool half = (cf[a] % 2) != 0;
                const bool bit = (mask >> a) & 1;
                if (bit) {
                    w *= half ? 0.5 : 0.0;
                    cc[a] = (base + 1) % gc.res();
                } else {
                    w *= half ? 0.5 : 1.0;
                    cc[a] = base;
                }
            }
            if (w != 0.0) acc += w * coarse[gc.pack(cc)];
        }
        out[i] = acc;
    }
    return out;
}

// Restrict the obstacle to a coarser level by exact subsampling at shared nodes.
GridFunction subsample(const GridFunction& h, const PeriodicGrid& coarse) {
    const PeriodicGrid& gf = h.grid();
    const int k = gf.res() / coarse.res();
    GridFunction out(coarse);
    for (std::size_t i = 0; i < coarse.node_count(); ++i) {
        auto c = coarse.unpack(i);
        for (int a = 0; a < coarse.dims(); ++a) c[a] *= k;
        out[i] = h[gf.pack(c)];
    }
    return out;
}

// Iterate one level to the residual target.  Returns sweeps used; leaves the
// frozen residual of the final iterate in *out.
int solve_level(std::vector<double>& u, const std::vector<double>& h, const PeriodicGrid& g,
                const HermitianBackground& bg, const EnvelopeOptions& opt, double omega,
                bool monotone_clamp, int sweep_budget, FrozenResidual* out,
                int sweep_offset) {
    Topo topo(g);
    LocalSolver ls(topo, u.data(), bg, g.spacing());
    int sweeps = 0;
    FrozenResidual fr;
    while (sweeps < sweep_budget) {
        const double gs = sweep(u, h, ls, topo, omega, monotone_clamp);
        ++sweeps;
        if (opt.observer) opt.observer(sweep_offset + sweeps, gs);
        if (opt.iterate_sink) opt.iterate_sink(u);
        if (gs <= opt.tol) {
            fr = frozen_residual(u, h, ls, topo);
            if (fr.functional <= opt.tol) break;
        }
    }
    if (out) {
        if (fr.functional <= 0.0 || fr.functional > opt.tol)
            fr = frozen_residual(u, h, ls, topo);
        *out = fr;
    }
    return sweeps;
}

} // namespace

std::vector<std::uint8_t> contact_set(const GridFunction& u, const GridFunction& h, double ctol) {
    if (!u.grid().same_layout(h.grid())) throw ParameterError("contact_set: grid mismatch");
    std::vector<std::uint8_t> mask(u.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i) mask[i] = (h[i] - u[i] <= ctol) ? 1 : 0;
    return mask;
}

EnvelopeResult psh_envelope(const GridFunction& h, const HermitianBackground& bg,
                            const EnvelopeOptions& opt) {
    const PeriodicGrid& g = h.grid();
    if (bg.n() != g.n()) throw ParameterError("psh_envelope: dimension mismatch");
    if (!(opt.tol > 0.0)) throw ParameterError("psh_envelope: tol must be positive");
    h.check_finite("psh_envelope obstacle");

    const double omega = opt.plain ? 1.0
                         : opt.omega > 0.0 ? opt.omega
                         : (g.n() == 1 ? 1.9 : 1.25);

    int total_sweeps = 0;
    FrozenResidual fr;
    GridFunction u;

    if (opt.plain || !opt.cascade || g.res() <= std::max(8, opt.coarse_res)) {
        u = GridFunction(g);
        if (opt.plain) {
            // reference scheme: start at the obstacle, clamp to non-increasing
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = h[i];
        } else {
            const double floor_value = h.min();
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = floor_value;
        }
        total_sweeps = solve_level(u.values(), h.values(), g, bg, opt, omega, opt.plain,
                                   opt.max_sweeps, &fr, 0);
    } else {
        // coarse-to-fine cascade
        std::vector<int> levels{g.res()};
        while (levels.back() / 2 >= std::max(8, opt.coarse_res) && levels.back() % 2 == 0 &&
               (levels.back() / 2) % 2 == 0)
            levels.push_back(levels.back() / 2);
        std::reverse(levels.begin(), levels.end());

        for (std::size_t li = 0; li < levels.size(); ++li) {
            const PeriodicGrid gl(g.n(), levels[li], g.period());
            GridFunction hl = (levels[li] == g.res()) ? h : subsample(h, gl);
            if (li == 0) {
                u = GridFunction(gl, hl.min());
            } else {
                GridFunction fine = prolong(u, gl);
                u = std::move(fine);
                // prolongation can overshoot the obstacle; clamp once
                for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::min(u[i], hl[i]);
            }
            const bool finest = levels[li] == g.res();
            const int budget = finest ? opt.max_sweeps : std::max(200, opt.max_sweeps / 8);
            total_sweeps += solve_level(u.values(), hl.values(), gl, bg, opt, omega, false,
                                        budget, finest ? &fr : nullptr, total_sweeps);
        }
    }

    if (fr.functional > opt.tol)
        throw NonConvergence("psh_envelope", total_sweeps, fr.functional);

    EnvelopeResult res;
    res.u = std::move(u);
    res.obstacle = h;
    res.iterations = total_sweeps;
    res.residual = fr.functional;
    res.eigen_residual = fr.eigen;
    res.ctol = 10.0 * opt.tol;
    res.contact = contact_set(res.u, h, res.ctol);
    res.converged = true;
    return res;
}

EnvelopeResult psh_envelope(const GridFunction& h, const HermitianBackground& bg, double tol,
                            int max_iter) {
    EnvelopeOptions opt;
    opt.tol = tol;
    opt.max_sweeps = max_iter;
    return psh_envelope(h, bg, opt);
}

OrthogonalityReport orthogonality_report(const EnvelopeResult& r, const HermitianBackground& bg) {
    const GridFunction mau = ma_density(r.u, bg);
    const GridFunction mah = ma_density(r.obstacle, bg);
    OrthogonalityReport rep;
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < mau.size(); ++i) {
        const double m = std::max(mau[i], 0.0);
        total += m;
        if (!r.contact[i]) off += m;
        if (r.contact[i]) {
            const double gap = std::abs(mau[i] - std::max(mah[i], 0.0));
            rep.max_contact_density_gap = std::max(rep.max_contact_density_gap, gap);
        }
    }
    rep.total_mass = total * r.u.grid().cell_volume();
    rep.off_contact_mass_fraction = total > 0.0 ? off / total : 0.0;
    return rep;
}

double orthogonality_defect(const EnvelopeResult& r, const HermitianBackground& bg) {
    return orthogonality_report(r, bg).off_contact_mass_fraction;
}

KeyLemmaReport key_lemma_check(const GridFunction& phi, const GridFunction& phihat,
                               const WeightChi& chi, const HermitianBackground& bg,
                               double ineq_tol, const EnvelopeOptions& opt) {
    const PeriodicGrid& g = phi.grid();
    if (!g.same_layout(phihat.grid())) throw ParameterError("key_lemma_check: grid mismatch");
    constexpr double kPshSlack = 1e-6;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (phi[i] > phihat[i] + kPshSlack)
            throw ParameterError("key_lemma_check: phi must lie below phihat");
    PshReport p1 = is_omega_psh(phi, bg, kPshSlack);
    PshReport p2 = is_omega_psh(phihat, bg, kPshSlack);
    if (!p1.psh || !p2.psh)
        throw ParameterError("key_lemma_check: inputs must be admissible (psh within tolerance)");
    if (chi.hprime(0.0) < 1.0 - 1e-12)
        throw ParameterError("key_lemma_check: weight slope at zero must be >= 1");

    GridFunction psi(g);
    for (std::size_t i = 0; i < psi.size(); ++i)
        psi[i] = phihat[i] + chi.chi(std::min(phi[i] - phihat[i], 0.0));

    EnvelopeResult env = psh_envelope(psi, bg, opt);

    const GridFunction mau = ma_density(env.u, bg);
    const GridFunction map = ma_density(phi, bg);
    KeyLemmaReport rep;
    rep.envelope_residual = env.residual;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mau.size(); ++i) {
        if (!env.contact[i]) continue;
        ++rep.contact_count;
        const double slope = chi.chiprime(std::min(phi[i] - phihat[i], 0.0));
        const double rhs = std::pow(slope, g.n()) * map[i];
        const double excess = mau[i] - rhs;
        if (excess > worst_excess) {
            worst_excess = excess;
            rep.worst_node = i;
        }
        if (rhs > 1e-14) rep.worst_ratio = std::max(rep.worst_ratio, mau[i] / rhs);
    }
    rep.worst_excess = rep.contact_count ? worst_excess : 0.0;
    rep.pass = rep.worst_excess <= ineq_tol;
    return rep;
}

} // namespace pshlab
