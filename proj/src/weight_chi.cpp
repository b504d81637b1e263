#include "pshlab/weight_chi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pshlab/errors.hpp"

namespace pshlab {

namespace {

// 12-point Gauss-Legendre nodes and weights on [-1, 1]
constexpr double kGlX[12] = {
    -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
    -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
    0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
    0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
constexpr double kGlW[12] = {
    0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
    0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
    0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
    0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

template <typename F>
double gauss12(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += kGlW[i] * f(mid + half * kGlX[i]);
    return s * half;
}

} // namespace

double DistributionFunction::value(double s) const {
    if (t.empty()) throw ParameterError("distribution has no samples");
    if (s < t.front()) return F.front();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    return F[k];
}

double DistributionFunction::default_T0() const {
    std::size_t last_pos = t.size();
    for (std::size_t k = 0; k < t.size(); ++k)
        if (F[k] > 0.0) last_pos = k;
    if (last_pos == t.size()) throw ZeroMass("distribution vanishes identically");
    if (last_pos == 0) return 0.0;
    return t[last_pos - 1];
}

void DistributionFunction::validate() const {
    if (t.size() != F.size() || t.empty())
        throw ParameterError("distribution sample arrays inconsistent");
    if (t.front() != 0.0) throw ParameterError("distribution t-grid must start at 0");
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k] > t[k - 1])) throw ParameterError("distribution t-grid not increasing");
        if (F[k] > F[k - 1] + 1e-12 * (1.0 + mu_total))
            throw ParameterError("distribution not non-increasing");
    }
    for (double v : F)
        if (v < -1e-15 || !std::isfinite(v)) throw ParameterError("distribution value invalid");
}

namespace {
DistributionFunction distribution_from_values(const std::vector<double>& depth,
                                              const GridMeasure& mu,
                                              const std::vector<double>& t_grid) {
    // depth[i] = how far below the reference the function sits at node i
    std::vector<std::size_t> order(depth.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return depth[a] > depth[b]; });
    DistributionFunction dist;
    dist.t = t_grid;
    dist.F.assign(t_grid.size(), 0.0);
    dist.mu_total = mu.total_mass();
    // sweep from deepest node; F(t) = mass of {depth > t}
    const double cv = mu.grid().cell_volume();
    std::size_t pos = 0;
    double acc = 0.0;
    for (std::size_t k = t_grid.size(); k-- > 0;) {
        while (pos < order.size() && depth[order[pos]] > t_grid[k]) {
            acc += mu.weight(order[pos]) * cv;
            ++pos;
        }
        dist.F[k] = acc;
    }
    dist.validate();
    return dist;
}
} // namespace

DistributionFunction distribution_function(const GridFunction& phi, const GridMeasure& mu,
                                           const std::vector<double>& t_grid) {
    if (!phi.grid().same_layout(mu.grid()))
        throw ParameterError("distribution_function: grid mismatch");
    const double sup = phi.max();
    if (std::abs(sup) > 1e-8)
        throw NormalizationError("distribution_function requires sup phi = 0", sup);
    std::vector<double> depth(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) depth[i] = -phi[i];
    return distribution_from_values(depth, mu, t_grid);
}

DistributionFunction distribution_function_gap(const GridFunction& phi, const GridFunction& phihat,
                                               const GridMeasure& mu,
                                               const std::vector<double>& t_grid) {
    if (!phi.grid().same_layout(mu.grid()) || !phihat.grid().same_layout(mu.grid()))
        throw ParameterError("distribution_function_gap: grid mismatch");
    std::vector<double> depth(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) depth[i] = phihat[i] - phi[i];
    return distribution_from_values(depth, mu, t_grid);
}

std::string to_string(ChiMode m) {
    switch (m) {
        case ChiMode::uniform: return "uniform";
        case ChiMode::stability: return "stability";
        case ChiMode::local: return "local";
    }
    return "?";
}

WeightChi WeightChi::identity() {
    WeightChi w;
    w.kind_ = Kind::identity;
    w.power_ = 1.0;
    w.t_linear_ = std::numeric_limits<double>::infinity();
    return w;
}

WeightChi WeightChi::truncated_log(double t_cut) {
    if (!(t_cut > 0.0 && t_cut < 1.0))
        throw ParameterError("truncated_log: t_cut must lie in (0, 1)");
    WeightChi w;
    w.kind_ = Kind::log1p;
    w.t_cut_ = t_cut;
    w.power_ = 1.0;
    w.t_linear_ = t_cut;
    return w;
}

WeightChi WeightChi::from_h_samples(std::vector<double> t, std::vector<double> h) {
    if (t.size() != h.size() || t.size() < 2)
        throw ParameterError("from_h_samples: need matching arrays with >= 2 samples");
    WeightChi w;
    w.kind_ = Kind::samples;
    w.st_ = std::move(t);
    w.sh_ = std::move(h);
    w.t_linear_ = w.st_.back();
    return w;
}

double WeightChi::g_tabulated(double t) const {
    const double tl = std::min(t, t_linear_);
    if (tl >= T0_) {
        // tail
        double dg = 0.0;
        switch (mode_) {
            case ChiMode::uniform: dg = 1.0 / (1.0 + T0_) - 1.0 / (1.0 + tl); break;
            case ChiMode::local: dg = std::atan(tl) - std::atan(T0_); break;
            case ChiMode::stability: dg = tl - T0_; break;
        }
        return tail_g0_ + dg;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), tl);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double tk = knots_[k];
    const double Fk = Fk_[k];
    double dg = 0.0;
    if (mode_ == ChiMode::stability)
        dg = (tl - tk) / Fk;
    else
        dg = (1.0 / (1.0 + tk) - 1.0 / (1.0 + tl)) / Fk;
    return g_at_[k] + dg;
}

double WeightChi::g(double t) const {
    switch (kind_) {
        case Kind::identity: return 1.0;
        case Kind::log1p: {
            const double hp = hprime(t);
            return std::pow(hp, power_);
        }
        case Kind::samples: {
            const double hp = hprime(t);
            return std::pow(hp, power_);
        }
        case Kind::tabulated: return g_tabulated(t);
    }
    return 1.0;
}

double WeightChi::gprime(double t) const {
    if (kind_ != Kind::tabulated) {
        const double dt = 1e-7 * (1.0 + std::abs(t));
        return (g(t + dt) - g(std::max(0.0, t - dt))) / (dt + std::min(t, dt));
    }
    if (t >= t_linear_) return 0.0;
    if (t >= T0_) {
        switch (mode_) {
            case ChiMode::uniform: return 1.0 / ((1.0 + t) * (1.0 + t));
            case ChiMode::local: return 1.0 / (t * t + 1.0);
            case ChiMode::stability: return 1.0;
        }
    }
    const double F = [&] {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        return Fk_[static_cast<std::size_t>(it - knots_.begin()) - 1];
    }();
    if (mode_ == ChiMode::stability) return 1.0 / F;
    return 1.0 / ((1.0 + t) * (1.0 + t) * F);
}

double WeightChi::hprime(double t) const {
    switch (kind_) {
        case Kind::identity: return 1.0;
        case Kind::log1p: return t < t_cut_ ? 1.0 / (1.0 - t) : 1.0 / (1.0 - t_cut_);
        case Kind::samples: {
            if (st_.empty()) return 1.0;
            auto it = std::upper_bound(st_.begin(), st_.end(), t);
            std::size_t k = it == st_.begin() ? 0 : static_cast<std::size_t>(it - st_.begin()) - 1;
            if (k + 1 >= st_.size()) k = st_.size() - 2;
            return (sh_[k + 1] - sh_[k]) / (st_[k + 1] - st_[k]);
        }
        case Kind::tabulated: return std::pow(g_tabulated(t), 1.0 / power_);
    }
    return 1.0;
}

double WeightChi::h_tabulated(double t) const {
    const auto integrand = [&](double s) { return std::pow(g_tabulated(s), 1.0 / power_); };
    // dense cumulative table is stored at knots_ extended through the tail
    auto it = std::upper_bound(knots_.begin(), knots_.end(), std::min(t, t_linear_));
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    double acc = h_at_[k];
    const double upto = std::min(t, t_linear_);
    if (upto > knots_[k]) acc += gauss12(integrand, knots_[k], upto);
    if (t > t_linear_) acc += (t - t_linear_) * hprime(t_linear_);
    return acc;
}

double WeightChi::h(double t) const {
    if (t <= 0.0) return t * hprime(0.0);
    switch (kind_) {
        case Kind::identity: return t;
        case Kind::log1p:
            if (t < t_cut_) return -std::log1p(-t);
            return -std::log1p(-t_cut_) + (t - t_cut_) / (1.0 - t_cut_);
        case Kind::samples: {
            auto it = std::upper_bound(st_.begin(), st_.end(), t);
            std::size_t k = it == st_.begin() ? 0 : static_cast<std::size_t>(it - st_.begin()) - 1;
            if (k + 1 >= st_.size()) k = st_.size() - 2;
            const double s = (sh_[k + 1] - sh_[k]) / (st_[k + 1] - st_[k]);
            return sh_[k] + s * (t - st_[k]);
        }
        case Kind::tabulated: return h_tabulated(t);
    }
    return t;
}

WeightChi::InvariantReport WeightChi::check_invariants() const {
    InvariantReport rep;
    rep.h0 = h(0.0);
    rep.hprime0 = hprime(0.0);
    rep.h_at_1 = h(1.0);
    double worst = std::numeric_limits<double>::infinity();
    double prev = hprime(0.0);
    const double tmax = std::isfinite(t_linear_) ? std::max(1.0, t_linear_) * 1.5 : 10.0;
    for (int i = 1; i <= 400; ++i) {
        const double cur = hprime(tmax * i / 400.0);
        worst = std::min(worst, cur - prev);
        prev = cur;
    }
    rep.worst_convexity = worst;
    rep.ok = std::abs(rep.h0) < 1e-12 && rep.hprime0 >= 1.0 - 1e-12 &&
             rep.h_at_1 >= 1.0 - 1e-10 && worst >= -1e-10;
    return rep;
}

WeightChi build_chi(const DistributionFunction& dist, double power, double T0, ChiMode mode) {
    dist.validate();
    if (!(power >= 1.0)) throw ParameterError("build_chi: power must be >= 1");
    if (!(T0 >= 0.0)) throw ParameterError("build_chi: T0 must be >= 0");
    if (T0 > dist.t_max() + 1e-12) throw ParameterError("build_chi: T0 beyond sampled range");

    WeightChi w;
    w.kind_ = WeightChi::Kind::tabulated;
    w.power_ = power;
    w.mode_ = mode;
    w.T0_ = T0;

    // head knots: dist samples below T0, then T0 itself
    w.knots_.push_back(0.0);
    w.Fk_.clear();
    for (std::size_t k = 0; k < dist.t.size(); ++k) {
        const double tk = dist.t[k];
        if (tk <= 0.0) continue;
        if (tk >= T0 - 1e-15) break;
        w.knots_.push_back(tk);
    }
    if (T0 > 0.0) w.knots_.push_back(T0);
    for (std::size_t k = 0; k + 1 < w.knots_.size(); ++k) {
        const double F = dist.value(w.knots_[k]);
        if (!(F > 0.0)) throw ZeroMass("build_chi: distribution vanishes before T0");
        w.Fk_.push_back(F);
    }

    // g at knots by the per-piece closed forms
    w.g_at_.assign(w.knots_.size(), 1.0);
    for (std::size_t k = 0; k + 1 < w.knots_.size(); ++k) {
        const double t0 = w.knots_[k], t1 = w.knots_[k + 1];
        double dg;
        if (mode == ChiMode::stability)
            dg = (t1 - t0) / w.Fk_[k];
        else
            dg = (1.0 / (1.0 + t0) - 1.0 / (1.0 + t1)) / w.Fk_[k];
        w.g_at_[k + 1] = w.g_at_[k] + dg;
    }
    w.tail_g0_ = w.g_at_.back();

    // tabulation horizon, then linear extension
    w.t_linear_ = std::max(2.0 * dist.t_max() + 10.0, 4.0 * T0 + 10.0);

    // extend the knot/cumulative tables through the tail so h lookups stay local
    {
        std::vector<double> all = w.knots_;
        const double tail_len = w.t_linear_ - T0;
        const int tail_pieces = std::max(16, static_cast<int>(tail_len / 0.25));
        for (int i = 1; i <= tail_pieces; ++i) all.push_back(T0 + tail_len * i / tail_pieces);
        // subdivide head pieces that are long
        std::vector<double> dense;
        dense.push_back(all.front());
        for (std::size_t k = 0; k + 1 < all.size(); ++k) {
            const double a = all[k], b = all[k + 1];
            const int sub = std::max(1, static_cast<int>((b - a) / 0.1));
            for (int i = 1; i <= sub; ++i) dense.push_back(a + (b - a) * i / sub);
        }
        // recompute piece data on the dense grid
        std::vector<double> Fd;
        for (std::size_t k = 0; k + 1 < dense.size(); ++k) {
            if (dense[k] < T0 - 1e-15)
                Fd.push_back(dist.value(dense[k]));
            else
                Fd.push_back(-1.0); // tail marker, unused
        }
        WeightChi w2 = w;
        w2.knots_ = dense;
        w2.Fk_.clear();
        w2.g_at_.assign(dense.size(), 1.0);
        for (std::size_t k = 0; k + 1 < dense.size(); ++k) {
            if (Fd[k] > 0.0) w2.Fk_.push_back(Fd[k]);
        }
        // g on dense grid straight from the closed forms of w
        for (std::size_t k = 0; k < dense.size(); ++k) w2.g_at_[k] = w.g_tabulated(dense[k]);
        // keep head Fk bookkeeping aligned: pieces at/beyond T0 never consult Fk_
        while (w2.Fk_.size() + 1 < w2.knots_.size()) w2.Fk_.push_back(1.0);
        // cumulative h by per-piece quadrature
        w2.h_at_.assign(dense.size(), 0.0);
        const auto integrand = [&](double s) { return std::pow(w.g_tabulated(s), 1.0 / power); };
        for (std::size_t k = 0; k + 1 < dense.size(); ++k)
            w2.h_at_[k + 1] = w2.h_at_[k] + gauss12(integrand, dense[k], dense[k + 1]);
        w = w2;
    }

    // normalization certificate: mu(X) + integral of g' against the sampled
    // distribution, computed piecewise-exactly
    {
        double B = dist.mu_total;
        if (mode == ChiMode::stability) {
            B += T0; // g' F = 1 on the head
        } else {
            B += 1.0 - 1.0 / (1.0 + T0);
        }
        // tail contribution uses the sampled distribution until it vanishes
        for (std::size_t k = 0; k < dist.t.size(); ++k) {
            const double a = std::max(dist.t[k], T0);
            const double b = (k + 1 < dist.t.size()) ? dist.t[k + 1]
                                                     : std::numeric_limits<double>::infinity();
            if (b <= a || dist.F[k] <= 0.0) continue;
            double seg = 0.0;
            switch (mode) {
                case ChiMode::uniform:
                    seg = 1.0 / (1.0 + a) - (std::isfinite(b) ? 1.0 / (1.0 + b) : 0.0);
                    break;
                case ChiMode::local:
                    seg = (std::isfinite(b) ? std::atan(b) : 1.5707963267948966) - std::atan(a);
                    break;
                case ChiMode::stability:
                    seg = std::isfinite(b) ? (b - a) : 0.0;
                    break;
            }
            B += dist.F[k] * seg;
        }
        w.B_bound_ = B;
    }

    return w;
}

double ChebyshevBound::operator()(double t) const {
    const double ht = chi->h(t);
    if (!(ht > 0.0)) return std::numeric_limits<double>::infinity();
    return Atilde / std::pow(ht, m);
}

ChebyshevBound chebyshev_bound(double Atilde, const WeightChi& chi, double m) {
    if (!(Atilde > 0.0) || !(m > 0.0)) throw ParameterError("chebyshev_bound: bad parameters");
    return ChebyshevBound{Atilde, m, &chi};
}

} // namespace pshlab
