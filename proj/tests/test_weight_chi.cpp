#include <cmath>
#include <vector>

#include "doctest.h"
#include "pshlab/errors.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/weight_chi.hpp"

using namespace pshlab;

namespace {

// Two-level test function: value 0 on half the nodes, -1 on the other half,
// under the uniform probability measure.  Its distribution function is the
// exact step F(t) = 1/2 on [0, 1), 0 on [1, inf).
struct TwoLevel {
    PeriodicGrid grid{1, 8};
    GridFunction phi;
    GridMeasure mu;

    TwoLevel() : phi(grid, 0.0), mu(GridMeasure::uniform_probability(grid)) {
        for (std::size_t i = 0; i < grid.node_count(); ++i)
            if (i % 2 == 0) phi[i] = -1.0;
    }
};

std::vector<double> quarter_grid() {
    std::vector<double> t;
    for (int k = 0; k <= 8; ++k) t.push_back(0.25 * k);
    return t;
}

double numeric_b(const WeightChi& chi, const DistributionFunction& dist) {
    // mu(X) + integral of g'(t) F(t) dt by fine midpoint quadrature
    double acc = dist.mu_total;
    const double tmax = dist.t_max();
    const int steps = 200000;
    for (int k = 0; k < steps; ++k) {
        const double t = tmax * (k + 0.5) / steps;
        acc += chi.gprime(t) * dist.value(t) * (tmax / steps);
    }
    return acc;
}

} // namespace

TEST_CASE("distribution function of a two-level function is the exact step") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    CHECK(dist.mu_total == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t k = 0; k < dist.t.size(); ++k) {
        const double expect = dist.t[k] < 1.0 ? 0.5 : 0.0;
        CHECK(dist.F[k] == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(dist.value(0.3) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(dist.value(1.7) == doctest::Approx(0.0).epsilon(1e-13));
    // largest positive-mass sample is t = 0.75, back off one step
    CHECK(dist.default_T0() == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("distribution function requires a normalized input") {
    TwoLevel tl;
    for (std::size_t i = 0; i < tl.phi.size(); ++i) tl.phi[i] -= 0.5;
    CHECK_THROWS_AS(distribution_function(tl.phi, tl.mu, quarter_grid()), NormalizationError);
}

TEST_CASE("identically zero depth has no usable horizon") {
    PeriodicGrid g(1, 8);
    GridFunction phi(g, 0.0);
    GridMeasure mu = GridMeasure::uniform_probability(g);
    DistributionFunction dist = distribution_function(phi, mu, quarter_grid());
    CHECK_THROWS_AS(dist.default_T0(), ZeroMass);
}

TEST_CASE("gap distribution measures how far one function sits below another") {
    PeriodicGrid g(1, 8);
    GridFunction lo(g, 0.0), hi(g, 0.0);
    GridMeasure mu = GridMeasure::uniform_probability(g);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (i < g.node_count() / 4) lo[i] = -2.0;
    DistributionFunction dist = distribution_function_gap(lo, hi, mu, quarter_grid());
    CHECK(dist.value(0.5) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(dist.value(1.99) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(dist.value(2.0) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("identity weight") {
    WeightChi chi = WeightChi::identity();
    CHECK(chi.h(0.7) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(chi.hprime(3.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(chi.g(5.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(chi.chi(-0.3) == doctest::Approx(-0.3).epsilon(1e-14));
    auto rep = chi.check_invariants();
    CHECK(rep.ok);
}

TEST_CASE("truncated logarithmic weight") {
    WeightChi chi = WeightChi::truncated_log(0.8);
    // h(t) = -log(1 - t) below the cut
    CHECK(chi.h(0.3) == doctest::Approx(-std::log(0.7)).epsilon(1e-13));
    CHECK(chi.hprime(0.3) == doctest::Approx(1.0 / 0.7).epsilon(1e-13));
    // linear beyond the cut with the matched slope 1 / (1 - t_cut)
    const double hc = -std::log(0.2);
    CHECK(chi.h(0.9) == doctest::Approx(hc + 0.1 / 0.2).epsilon(1e-12));
    CHECK(chi.hprime(0.95) == doctest::Approx(5.0).epsilon(1e-13));
    // chi(s) = -h(-s) is concave increasing with chi(0) = 0
    CHECK(chi.chi(-0.3) == doctest::Approx(std::log(0.7)).epsilon(1e-13));
    CHECK(chi.chi(0.0) == doctest::Approx(0.0).epsilon(1e-14));
    auto rep = chi.check_invariants();
    CHECK(rep.ok);
    CHECK_THROWS_AS(WeightChi::truncated_log(1.5), ParameterError);
    CHECK_THROWS_AS(WeightChi::truncated_log(0.0), ParameterError);
}

TEST_CASE("uniform-mode weight from the two-level distribution: closed forms") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    const double T0 = dist.default_T0();
    REQUIRE(T0 == doctest::Approx(0.5));
    WeightChi chi = build_chi(dist, 1.0, T0, ChiMode::uniform);

    // On the head F = 1/2, so g(t) = 1 + 2 (1 - 1/(1+t)) = 1 + 2t/(1+t)
    for (double t : {0.1, 0.25, 0.4, 0.5}) {
        CHECK(chi.g(t) == doctest::Approx(1.0 + 2.0 * t / (1.0 + t)).epsilon(1e-12));
    }
    // Tail: g(t) = g(T0) + 1/(1+T0) - 1/(1+t)
    const double gT0 = 1.0 + 2.0 * 0.5 / 1.5;
    CHECK(chi.g(2.0) == doctest::Approx(gT0 + 1.0 / 1.5 - 1.0 / 3.0).epsilon(1e-12));
    // g caps at the linear horizon; far beyond it h grows linearly
    const double far = 1e6;
    CHECK(chi.hprime(far) == doctest::Approx(chi.hprime(chi.linear_horizon())).epsilon(1e-12));

    // h(t) = int_0^t g = 3t - 2 log(1+t) on the head (power = 1)
    for (double t : {0.2, 0.5}) {
        CHECK(chi.h(t) == doctest::Approx(3.0 * t - 2.0 * std::log1p(t)).epsilon(1e-10));
    }
    // h(0) = 0, h'(0) = g(0) = 1
    auto rep = chi.check_invariants();
    CHECK(rep.ok);

    // Normalization certificate: the exact piecewise value is
    // mu(X) + [head] 1/3 + [tail] 1/2 (1/1.5 - 1/2) = 1 + 1/3 + 1/12 = 17/12
    CHECK(chi.B_bound() == doctest::Approx(17.0 / 12.0).epsilon(1e-12));
    CHECK(chi.B_bound() <= 2.0);
    // and it matches the numeric integral of g' against the sampled distribution
    CHECK(numeric_b(chi, dist) == doctest::Approx(chi.B_bound()).epsilon(1e-4));
}

TEST_CASE("stability-mode weight has a linear head and linear tail") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    WeightChi chi = build_chi(dist, 1.0, 0.5, ChiMode::stability);
    // head: g(t) = 1 + t / F = 1 + 2t, so h = t + t^2
    CHECK(chi.g(0.3) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(chi.h(0.5) == doctest::Approx(0.75).epsilon(1e-10));
    // tail: g(t) = 2 + (t - 0.5)
    CHECK(chi.g(1.5) == doctest::Approx(3.0).epsilon(1e-12));
    // B = mu(X) + T0 + F-weighted tail length = 1 + 0.5 + 0.5 * 0.5
    CHECK(chi.B_bound() == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(chi.check_invariants().ok);
}

TEST_CASE("local-mode weight uses the arctangent tail") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    WeightChi chi = build_chi(dist, 2.0, 0.5, ChiMode::local);
    const double gT0 = 1.0 + 2.0 * 0.5 / 1.5;
    CHECK(chi.g(0.5) == doctest::Approx(gT0).epsilon(1e-12));
    CHECK(chi.g(3.0) == doctest::Approx(gT0 + std::atan(3.0) - std::atan(0.5)).epsilon(1e-12));
    // g is continuous across T0
    CHECK(chi.g(0.5 - 1e-9) == doctest::Approx(chi.g(0.5 + 1e-9)).epsilon(1e-6));
    // power 2 takes the square root into h'
    CHECK(chi.hprime(0.3) == doctest::Approx(std::sqrt(chi.g(0.3))).epsilon(1e-12));
    // B certificate: head as uniform, tail atan-weighted
    const double expect = 1.0 + (1.0 - 1.0 / 1.5) + 0.5 * (std::atan(1.0) - std::atan(0.5));
    CHECK(chi.B_bound() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(chi.check_invariants().ok);
}

TEST_CASE("weight construction validates its inputs") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    CHECK_THROWS_AS(build_chi(dist, 0.5, 0.5, ChiMode::uniform), ParameterError);
    CHECK_THROWS_AS(build_chi(dist, 1.0, -0.1, ChiMode::uniform), ParameterError);
    CHECK_THROWS_AS(build_chi(dist, 1.0, 99.0, ChiMode::uniform), ParameterError);
    // T0 in a region where the distribution already vanished
    CHECK_THROWS_AS(build_chi(dist, 1.0, 1.5, ChiMode::uniform), ZeroMass);
}

TEST_CASE("convexity of h survives the power transform") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    for (double power : {1.0, 2.0, 4.0}) {
        WeightChi chi = build_chi(dist, power, 0.5, ChiMode::uniform);
        double prev = chi.hprime(0.0);
        CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));
        for (int k = 1; k <= 300; ++k) {
            const double t = 30.0 * k / 300.0;
            const double cur = chi.hprime(t);
            CHECK(cur >= prev - 1e-10);
            prev = cur;
        }
    }
}

TEST_CASE("piecewise-linear weight from samples") {
    WeightChi chi = WeightChi::from_h_samples({0.0, 1.0, 3.0}, {0.0, 2.0, 8.0});
    CHECK(chi.h(0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(chi.h(2.0) == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(chi.hprime(0.5) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(chi.hprime(2.5) == doctest::Approx(3.0).epsilon(1e-13));
    // linear extension beyond the last sample
    CHECK(chi.h(5.0) == doctest::Approx(8.0 + 2.0 * 3.0).epsilon(1e-13));
    CHECK_THROWS_AS(WeightChi::from_h_samples({0.0}, {0.0}), ParameterError);
}

TEST_CASE("Chebyshev-type bound decays like the weight to the power m") {
    TwoLevel tl;
    DistributionFunction dist = distribution_function(tl.phi, tl.mu, quarter_grid());
    WeightChi chi = build_chi(dist, 1.0, 0.5, ChiMode::uniform);
    ChebyshevBound bound = chebyshev_bound(3.0, chi, 4.0);
    CHECK(std::isinf(bound(0.0)));
    const double t = 0.4;
    CHECK(bound(t) == doctest::Approx(3.0 / std::pow(chi.h(t), 4.0)).epsilon(1e-12));
    CHECK(bound(2.0) < bound(1.0));
    CHECK_THROWS_AS(chebyshev_bound(-1.0, chi, 4.0), ParameterError);
}
