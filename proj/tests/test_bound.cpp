#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "pshlab/bound_engine.hpp"
#include "pshlab/errors.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/weight_chi.hpp"

using namespace pshlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

template <typename F>
double rk4(const F& f, double x, double y, double step) {
    const double k1 = f(x, y);
    const double k2 = f(x + 0.5 * step, y + 0.5 * step * k1);
    const double k3 = f(x + 0.5 * step, y + 0.5 * step * k2);
    const double k4 = f(x + step, y + step * k3);
    return y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Independent blow-up time for h' = (1 + h^alpha/(alpha A (1+t)^2))^(1/beta),
// h(0) = 0.  Phase A integrates the inverse function t(h) with fixed-step RK4
// up to h = 2.  Phase B substitutes w = h^(-kappa) with kappa =
// (alpha-beta)/beta: dt/dw stays bounded and smooth all the way to w = 0,
// which is exactly the blow-up point, so a uniform mesh reaches T directly.
double oracle_horizon(double alpha, double beta, double A) {
    const auto slope = [&](double t, double h) {
        const double lift = 1.0 + t;
        return std::pow(1.0 + std::pow(h, alpha) / (alpha * A * lift * lift),
                        1.0 / beta);
    };
    double t = 0.0;
    {
        const int steps = 20000;
        const double dh = 2.0 / steps;
        double h = 0.0;
        const auto inverse = [&](double hh, double tt) { return 1.0 / slope(tt, hh); };
        for (int i = 0; i < steps; ++i) {
            t = rk4(inverse, h, t, dh);
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
        t = rk4(tail, s, t, ds);
        s += ds;
    }
    return t;
}

TraceRow find_row(const std::vector<TraceRow>& rows, const std::string& id) {
    for (const TraceRow& row : rows)
        if (row.id == id) return row;
    CAPTURE(id);
    REQUIRE(false);
    return {};
}

} // namespace

TEST_CASE("extremal horizon matches an independent two-phase integration") {
    for (int n : {1, 2}) {
        for (double gap : {0.5, 1.0, 2.0, 3.5, 6.0}) {
            const double m = n + gap;
            for (double budget : {1.0, 7.5}) {
                const double eps = (m - n) / 3.0;
                const double alpha = m + 1.0;
                const double beta = n + 2.0 * eps + 1.0;
                const OdeIntegration ode = integrate_ode_uniform(n, m, budget);
                const double ref = oracle_horizon(alpha, beta, budget);
                CAPTURE(n);
                CAPTURE(m);
                CAPTURE(budget);
                CHECK(ode.T == doctest::Approx(ref).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("uniform exponent chain records the (1,4) constants") {
    const OdeIntegration ode = integrate_ode_uniform(1, 4.0, 2.0);
    const auto get = [&](const std::string& key) {
        for (const auto& kv : ode.derived)
            if (kv.first == key) return kv.second;
        REQUIRE(false);
        return 0.0;
    };
    CHECK(get("epsilon") == doctest::Approx(1.0));
    CHECK(get("alpha") == doctest::Approx(5.0));
    CHECK(get("beta") == doctest::Approx(4.0));
    CHECK(get("C") == doctest::Approx(std::pow(10.0, 0.25)));
    for (const TraceRow& row : ode.trace) {
        CAPTURE(row.id);
        CHECK(row.pass);
        CHECK(row.lhs <= row.rhs * (1.0 + 1e-9));
    }
    CHECK(ode.T > 0.0);
    CHECK(ode.T <= get("T_closed_form") * (1.0 + 1e-9));
    CHECK(ode.T == doctest::Approx(oracle_horizon(5.0, 4.0, 2.0)).epsilon(1e-6));
}

TEST_CASE("horizon grows with the budget and validates inputs") {
    CHECK(integrate_ode_uniform(1, 4.0, 1.0).T < integrate_ode_uniform(1, 4.0, 10.0).T);
    CHECK_THROWS_AS(integrate_ode_uniform(1, 1.0, 2.0), ParameterError);
    CHECK_THROWS_AS(integrate_ode_uniform(1, 4.0, 0.5), ParameterError);
    CHECK_THROWS_AS(integrate_ode_uniform(0, 4.0, 1.0), ParameterError);
}

TEST_CASE("uniform certificate applies the budget inflation") {
    const BoundCertificate cert = uniform_bound(1, 4.0, 1.0);
    CHECK(cert.mode == "uniform");
    CHECK(cert.derived_value("Atilde") == doctest::Approx(3.0));
    CHECK(cert.derived_value("Atilde_floored") == 0.0);
    CHECK(cert.all_pass());
    CHECK(cert.T == doctest::Approx(integrate_ode_uniform(1, 4.0, 3.0).T));
    CHECK(cert.bound == cert.T);
    CHECK_THROWS_AS(cert.derived_value("no_such_constant"), ParameterError);
    CHECK_THROWS_AS(uniform_bound(1, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(uniform_bound(1, 4.0, 0.0), ParameterError);

    const BoundCertificate tiny = uniform_bound(1, 4.0, 0.01);
    CHECK(tiny.derived_value("Atilde") == doctest::Approx(1.0));
    CHECK(tiny.derived_value("Atilde_floored") == 1.0);
    CHECK(tiny.all_pass());
}

TEST_CASE("uniform exponents stay ordered across the (n, m) range") {
    for (int n : {1, 2}) {
        for (int k = 1; k <= 20; ++k) {
            const double m = n + 0.5 * k;
            const BoundCertificate cert = uniform_bound(n, m, 1.0);
            CAPTURE(n);
            CAPTURE(m);
            CHECK(find_row(cert.trace, "alpha_exceeds_beta").pass);
            CHECK(find_row(cert.trace, "beta_exceeds_two").pass);
            CHECK(cert.all_pass());
            CHECK(cert.T > 0.0);
            CHECK(std::isfinite(cert.T));
        }
    }
}

TEST_CASE("local certificate matches the oracle and decreases in m") {
    const BoundCertificate cert = local_bound(1, 4.0, 2.0);
    CHECK(cert.mode == "local");
    CHECK(cert.derived_value("beta") == doctest::Approx(2.0));
    CHECK(cert.derived_value("tail_normalization_budget") == doctest::Approx(2.0));
    CHECK(cert.all_pass());
    CHECK(cert.T == doctest::Approx(oracle_horizon(5.0, 2.0, 2.0)).epsilon(1e-6));

    double prev = std::numeric_limits<double>::infinity();
    for (int mi = 2; mi <= 8; ++mi) {
        const double T = local_bound(1, static_cast<double>(mi), 2.0).T;
        CAPTURE(mi);
        CHECK(T < prev);
        prev = T;
    }

    const BoundCertificate two = local_bound(2, 5.0, 1.5);
    CHECK(two.derived_value("beta") == doctest::Approx(3.0));
    CHECK(two.T == doctest::Approx(oracle_horizon(6.0, 3.0, 1.5)).epsilon(1e-6));

    CHECK_THROWS_AS(local_bound(1, 4.0, 0.5), ParameterError);
    CHECK_THROWS_AS(local_bound(2, 2.0, 1.5), ParameterError);
}

TEST_CASE("stability certificate derives the documented exponent chain") {
    const BoundCertificate cert = stability_bound(1, 4.0, 2.0, 0.5, 0.1);
    CHECK(cert.mode == "stability");
    CHECK(cert.derived_value("epsilon") == doctest::Approx(3.0));
    CHECK(cert.derived_value("a") == doctest::Approx(0.375));
    CHECK(cert.derived_value("b") == doctest::Approx(0.75));
    CHECK(cert.derived_value("c") == doctest::Approx(1.0));
    CHECK(cert.derived_value("q") == doctest::Approx(12.25));
    CHECK(cert.derived_value("gamma") ==
          doctest::Approx(0.0982142857142857).epsilon(1e-12));
    CHECK(cert.derived_value("alpha") == doctest::Approx(5.0));
    CHECK(cert.derived_value("beta") == doctest::Approx(4.0));
    const double tau = cert.derived_value("tau");
    CHECK(tau == doctest::Approx(0.0982142857142857 / 5.0).epsilon(1e-12));
    CHECK(tau > 0.0);
    CHECK(tau < 1.0);
    CHECK(cert.all_pass());
    CHECK(find_row(cert.trace, "exponent_identity_q").pass);
    CHECK(find_row(cert.trace, "exponent_identity_gamma").pass);
    CHECK(cert.derived_value("q") * (0.75 - 0.375) ==
          doctest::Approx(4.59375).epsilon(1e-12));
    CHECK(cert.derived_value("q_below_m") == 0.0);
    CHECK(cert.bound == doctest::Approx(cert.T * std::pow(0.1, tau)));
}

TEST_CASE("stability bound degenerates at zero mass and grows with mass") {
    const BoundCertificate zero = stability_bound(1, 4.0, 2.0, 0.5, 0.0);
    CHECK(zero.bound == 0.0);
    CHECK(zero.T > 0.0);
    CHECK(zero.all_pass());

    const double b1 = stability_bound(1, 4.0, 2.0, 0.5, 0.05).bound;
    const double b2 = stability_bound(1, 4.0, 2.0, 0.5, 0.5).bound;
    const double b3 = stability_bound(1, 4.0, 2.0, 0.5, 5.0).bound;
    CHECK(b1 < b2);
    CHECK(b2 < b3);
    CHECK(zero.T == doctest::Approx(stability_bound(1, 4.0, 2.0, 0.5, 0.5).T));

    CHECK_THROWS_AS(stability_bound(1, 4.0, 2.0, -0.1, 0.1), ParameterError);
    CHECK_THROWS_AS(stability_bound(1, 4.0, 2.0, 0.5, -1.0), ParameterError);
    CHECK_THROWS_AS(stability_bound(1, 1.0, 2.0, 0.5, 0.1), ParameterError);
}

TEST_CASE("moment estimate handles the trivial candidate family") {
    const PeriodicGrid grid(1, 32);
    const GridMeasure mu = GridMeasure::uniform_probability(grid);
    const std::vector<GridFunction> zero = {GridFunction(grid, 0.0)};
    const AmEstimate est = estimate_Am(mu, 4.0, zero);
    CHECK(est.lower == 0.0);
    CHECK_FALSE(est.upper_available);

    HolderInput holder;
    holder.p = 2.0;
    holder.f_norm_p = 1.0;
    const AmEstimate with_upper = estimate_Am(mu, 4.0, zero, holder);
    CHECK(with_upper.upper_available);
    CHECK(with_upper.upper_heuristic == 0.0);
    CHECK(with_upper.lower <= with_upper.upper_heuristic);

    CHECK_THROWS_AS(estimate_Am(mu, 4.0, {}), EmptyCandidates);
    CHECK_THROWS_AS(estimate_Am(mu, 0.5, zero), ParameterError);
    const std::vector<GridFunction> off = {GridFunction(grid, 0.5)};
    CHECK_THROWS_AS(estimate_Am(mu, 4.0, off), NormalizationError);
}

TEST_CASE("log-pole candidate moment matches the radial quadrature oracle") {
    const int res = 256;
    const PeriodicGrid grid(1, res);
    const GridMeasure mu = GridMeasure::uniform_probability(grid);
    const double pole_strength = 1.0;
    const double cap = 4.0;
    const double m = 3.0;

    GridFunction psi = GridFunction::sample(grid, [&](const std::array<double, 4>& x) {
        const double dx = grid.wrap_delta(x[0], 0.5);
        const double dy = grid.wrap_delta(x[1], 0.5);
        const double r = std::sqrt(dx * dx + dy * dy);
        return r > 0.0 ? std::max(pole_strength * std::log(r), -cap) : -cap;
    });
    const double shift = psi.max();
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] -= shift;

    const std::vector<GridFunction> family = {psi};
    const AmEstimate est = estimate_Am(mu, m, family);

    // Oracle: integrate (min(cap, -log r) + shift)^m over the unit square by
    // distance rings; the ring length switches form once circles leave the
    // square, and the capped core integrates exactly as a constant disk.
    const auto ring = [](double r) {
        if (r <= 0.5) return 2.0 * kPi * r;
        const double corner = std::sqrt(0.5);
        if (r >= corner) return 0.0;
        return r * (2.0 * kPi - 8.0 * std::acos(0.5 / r));
    };
    const auto depth = [&](double r) {
        const double v = std::min(cap, -pole_strength * std::log(r)) + shift;
        return std::max(0.0, v);
    };
    const auto simpson = [&](double lo, double hi, int panels) {
        const double step = (hi - lo) / panels;
        double acc = 0.0;
        for (int i = 0; i < panels; ++i) {
            const double r0 = lo + i * step;
            const double r2 = r0 + step;
            const double r1 = 0.5 * (r0 + r2);
            const auto f = [&](double r) { return std::pow(depth(r), m) * ring(r); };
            acc += (step / 6.0) * (f(r0) + 4.0 * f(r1) + f(r2));
        }
        return acc;
    };
    const double r_core = std::exp(-cap / pole_strength);
    double total = std::pow(cap + shift, m) * kPi * r_core * r_core;
    total += simpson(r_core, 0.5, 20000);
    total += simpson(0.5, std::sqrt(0.5), 20000);
    const double oracle = std::pow(total, 1.0 / m);

    CHECK(est.lower == doctest::Approx(oracle).epsilon(1e-3));

    HolderInput holder;
    holder.p = 2.0;
    holder.f_norm_p = 1.0; // uniform probability density on the unit torus
    const AmEstimate with_upper = estimate_Am(mu, m, family, holder);
    CHECK(with_upper.upper_available);
    CHECK(with_upper.lower <= with_upper.upper_heuristic);
}

TEST_CASE("Luxembourg norm matches the scalar equation for flat input") {
    const PeriodicGrid grid(1, 16);
    const GridFunction one(grid, 1.0);
    const double m = 2.0;
    const OrliczReport rep = orlicz_check(one, m);
    CHECK(rep.admissible);

    // unit total volume: the budget integral collapses to w(1/r) = 1
    const double e = std::exp(1.0);
    const auto young = [&](double r) {
        const double x = 1.0 / r;
        return x * std::pow(std::log(e + x), m);
    };
    double lo = 1e-6;
    double hi = 1e6;
    for (int i = 0; i < 300; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (young(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    CHECK(rep.norm == doctest::Approx(hi).epsilon(1e-10));
}

TEST_CASE("Luxembourg norm is monotone and quasi-homogeneous") {
    const PeriodicGrid grid(1, 32);
    const GridFunction f = GridFunction::sample(grid, [](const std::array<double, 4>& x) {
        return 1.0 + 0.5 * std::sin(2.0 * kPi * x[0]) + 0.25 * std::cos(2.0 * kPi * x[1]);
    });
    const OrliczReport base = orlicz_check(f, 3.0);
    GridFunction doubled = f;
    for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] *= 2.0;
    const OrliczReport twice = orlicz_check(doubled, 3.0);
    CHECK(twice.norm <= 2.0 * base.norm * (1.0 + 1e-10));
    CHECK(twice.norm >= base.norm * (1.0 - 1e-10));

    const OrliczReport none = orlicz_check(GridFunction(grid, 0.0), 3.0);
    CHECK(none.norm == 0.0);
    CHECK(none.admissible);
}

TEST_CASE("truncated log density is Orlicz-admissible at m = 3") {
    const int res = 128;
    const PeriodicGrid grid(1, res);
    const double cell_cap = -std::log(0.5 / res);
    const GridFunction f = GridFunction::sample(grid, [&](const std::array<double, 4>& x) {
        const double dx = grid.wrap_delta(x[0], 0.25);
        const double dy = grid.wrap_delta(x[1], 0.75);
        const double r = std::sqrt(dx * dx + dy * dy);
        return r > 0.0 ? std::min(-std::log(r), cell_cap) : cell_cap;
    });
    CHECK(f.min() >= 0.0);
    const OrliczReport rep = orlicz_check(f, 3.0);
    CHECK(rep.admissible);
    CHECK(rep.norm > 0.0);
    CHECK(std::isfinite(rep.norm));
}

TEST_CASE("proof chain replays on a measured cosine distribution") {
    const int res = 512;
    const PeriodicGrid grid(1, res);
    const GridMeasure mu = GridMeasure::uniform_probability(grid);
    const GridFunction phi = GridFunction::sample(grid, [](const std::array<double, 4>& x) {
        return 0.8 * (std::cos(2.0 * kPi * x[0]) - 1.0);
    });
    const double m = 4.0;

    std::vector<double> term(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        term[i] = std::pow(-phi[i], m) * mu.weight(i);
    const double budget = pairwise_sum(term) * grid.cell_volume();

    std::vector<double> t_grid;
    for (int k = 0; k <= 220; ++k) t_grid.push_back(1.7 * k / 220.0);
    const DistributionFunction dist = distribution_function(phi, mu, t_grid);

    const std::vector<TraceRow> rows = bound_self_consistency(dist, 1, m, budget);
    CHECK(rows.size() == 6);
    for (const TraceRow& row : rows) {
        CAPTURE(row.id);
        CAPTURE(row.lhs);
        CAPTURE(row.rhs);
        CHECK(row.pass);
    }

    // a budget far below the measured moment must break the domination rows
    const std::vector<TraceRow> broken =
        bound_self_consistency(dist, 1, m, budget * 1e-6);
    CHECK_FALSE(find_row(broken, "chebyshev_dominates_distribution").pass);
    CHECK_FALSE(find_row(broken, "reweighted_moment_within_budget").pass);

    CHECK_THROWS_AS(bound_self_consistency(dist, 1, m, 0.0), ParameterError);
    CHECK_THROWS_AS(bound_self_consistency(dist, 1, 0.5, budget), ParameterError);
}

TEST_CASE("certificates serialize to parseable JSON") {
    const BoundCertificate cert = uniform_bound(2, 5.0, 1.25);
    const nlohmann::json j = nlohmann::json::parse(cert.to_json());
    CHECK(j["mode"] == "uniform");
    CHECK(j["n"] == 2);
    CHECK(j["m"].get<double>() == doctest::Approx(5.0));
    CHECK(j["T"].get<double>() == doctest::Approx(cert.T));
    CHECK(j["bound"].get<double>() == doctest::Approx(cert.bound));
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["trace"].is_array());
    CHECK(j["trace"].size() == cert.trace.size());
    bool has_atilde = false;
    for (const auto& item : j["derived"])
        if (item["name"] == "Atilde") has_atilde = true;
    CHECK(has_atilde);
    CHECK_FALSE(j.contains("phihat_sup"));

    const BoundCertificate st = stability_bound(1, 4.0, 2.0, 0.25, 0.3);
    const nlohmann::json js = nlohmann::json::parse(st.to_json());
    CHECK(js["phihat_sup"].get<double>() == doctest::Approx(0.25));
    CHECK(js["mass"].get<double>() == doctest::Approx(0.3));
    CHECK(js["bound"].get<double>() == doctest::Approx(st.bound));
    CHECK(js["all_pass"].get<bool>());
}
