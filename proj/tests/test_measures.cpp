#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "pshlab/bound_engine.hpp"
#include "pshlab/errors.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/hermitian.hpp"
#include "pshlab/measures.hpp"

using namespace pshlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Length of the circle of radius r about a torus point (unit period, n = 1),
// i.e. the part of the circle inside the fundamental square [-1/2, 1/2)^2.
double ring_length(double r) {
    if (r <= 0.0) return 0.0;
    if (r <= 0.5) return 2.0 * kPi * r;
    const double corner = std::sqrt(0.5);
    if (r >= corner) return 0.0;
    return r * (2.0 * kPi - 8.0 * std::acos(0.5 / r));
}

template <typename F>
double simpson(const F& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return acc * h / 3.0;
}

GridFunction weights_as_function(const GridMeasure& mu) {
    GridFunction f(mu.grid(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) f[i] = mu.weight(i);
    return f;
}

} // namespace

TEST_CASE("uniform and modulated densities normalize exactly") {
    const PeriodicGrid grid(1, 32);
    const auto bg = HermitianBackground::standard(1);

    DensitySpec uni;
    const GridMeasure mu = build_density(uni, grid, bg);
    CHECK(std::abs(mu.total_mass() - 1.0) <= 1e-10);
    for (std::size_t i = 1; i < mu.size(); ++i)
        CHECK(mu.weight(i) == doctest::Approx(mu.weight(0)).epsilon(1e-14));

    DensitySpec mod;
    mod.kind = "manufactured";
    mod.amplitude = 0.35; // inside the positivity budget for n = 1 and n = 2
    const GridMeasure nu = build_density(mod, grid, bg);
    CHECK(std::abs(nu.total_mass() - 1.0) <= 1e-10);
    double wmin = nu.weight(0), wmax = nu.weight(0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        wmin = std::min(wmin, nu.weight(i));
        wmax = std::max(wmax, nu.weight(i));
    }
    CHECK(wmin > 0.0);
    CHECK(wmax > 1.5 * wmin);

    const PeriodicGrid g2(2, 8);
    const auto bg2 = HermitianBackground::standard(2);
    const GridMeasure nu2 = build_density(mod, g2, bg2);
    CHECK(std::abs(nu2.total_mass() - 1.0) <= 1e-10);
}

TEST_CASE("pole density L^p energy matches a radial quadrature oracle") {
    const int res = 256;
    const PeriodicGrid grid(1, res);
    const auto bg = HermitianBackground::standard(1);

    DensitySpec spec;
    spec.kind = "lp-singular";
    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.strengths = {1.0}; // pole |z - z0|^{-1}
    spec.p = 1.5;

    std::vector<double> caps;
    const GridMeasure mu = build_density(spec, grid, bg, &caps);
    REQUIRE(caps.size() == 1);
    CHECK(caps[0] == doctest::Approx(static_cast<double>(res)));
    CHECK(std::abs(mu.total_mass() - 1.0) <= 1e-10);

    // L^p energy of the normalized density on the grid.
    auto lp_energy = [](const GridMeasure& m, double p) {
        std::vector<double> terms(m.size());
        for (std::size_t i = 0; i < m.size(); ++i)
            terms[i] = std::pow(m.weight(i), p);
        return pairwise_sum(terms) * m.grid().cell_volume();
    };
    const double S_grid = lp_energy(mu, spec.p);
    CHECK(std::isfinite(S_grid));

    // Continuum oracle for the same truncated profile, by radial quadrature:
    // f_raw = min(1/r, cap) has mass cap*pi*h^2 on the capped core disk plus
    // the ring integral outside; same for the p-th power.
    const double h = grid.spacing();
    const double cap = caps[0];
    auto raw = [&](double r) { return std::min(1.0 / std::max(r, 1e-300), cap); };
    auto moment = [&](double p) {
        const double core = std::pow(cap, p) * kPi * h * h;
        auto g = [&](double r) { return std::pow(raw(r), p) * ring_length(r); };
        return core + simpson(g, h, 0.5, 16384) +
               simpson(g, 0.5, std::sqrt(0.5), 4096);
    };
    const double Z = moment(1.0);
    const double S_oracle = moment(spec.p) / std::pow(Z, spec.p);
    CHECK(S_grid == doctest::Approx(S_oracle).epsilon(0.10));

    // Trend flat under resolution doubling: successive differences shrink.
    const double S64 =
        lp_energy(build_density(spec, PeriodicGrid(1, 64), bg), spec.p);
    const double S128 =
        lp_energy(build_density(spec, PeriodicGrid(1, 128), bg), spec.p);
    const double d1 = std::abs(S128 - S64);
    const double d2 = std::abs(S_grid - S128);
    CHECK(d2 < d1);

    // A declared class the pole exponents contradict is rejected up front.
    DensitySpec bad = spec;
    bad.strengths = {2.0}; // exponent * p = 3 >= 2n = 2
    CHECK_THROWS_AS(build_density(bad, grid, bg), ParameterError);
}

TEST_CASE("exponential-singularity density records truncation and its singular set") {
    const int res = 128;
    const PeriodicGrid grid(1, res);
    const auto bg = HermitianBackground::standard(1);

    DensitySpec spec;
    spec.kind = "exp-singular";
    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.strengths = {3.0};
    spec.q = 2.0;

    std::vector<double> caps;
    const GridMeasure mu = build_density(spec, grid, bg, &caps);
    CHECK(std::abs(mu.total_mass() - 1.0) <= 1e-10);
    REQUIRE(caps.size() == 1);
    CHECK(caps[0] == doctest::Approx(std::pow(res, 3.0))); // floor^{-c}

    const QuasiPshWeight psi(grid, {{{0.5, 0.5, 0.0, 0.0}, 3.0}}, bg);
    const auto mask = singular_set(psi, 1.0 / spec.q);
    std::size_t hits = 0, where = 0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) {
            ++hits;
            where = i;
        }
    CHECK(hits == 1);
    const auto c = grid.unpack(where);
    CHECK(c[0] == res / 2);
    CHECK(c[1] == res / 2);
}

TEST_CASE("singular set thresholds on declared coefficients and is monotone") {
    const PeriodicGrid grid(1, 64);
    const auto bg = HermitianBackground::standard(1);
    const QuasiPshWeight psi(
        grid, {{{0.25, 0.25, 0.0, 0.0}, 3.0}, {{0.75, 0.75, 0.0, 0.0}, 0.2}}, bg);

    auto count = [](const std::vector<std::uint8_t>& m) {
        return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
    };

    CHECK(count(singular_set(psi, 4.0)) == 0);   // above every coefficient
    const auto at_one = singular_set(psi, 1.0);  // only the strong pole
    CHECK(count(at_one) == 1);
    CHECK(at_one[grid.pack({16, 16, 0, 0})] == 1);
    CHECK(count(singular_set(psi, 0.1)) == 2);

    const double levels[] = {0.05, 0.1, 0.2, 1.0, 3.0, 3.5};
    for (std::size_t a = 0; a + 1 < std::size(levels); ++a) {
        const auto lo = singular_set(psi, levels[a]);
        const auto hi = singular_set(psi, levels[a + 1]);
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (hi[i]) CHECK(lo[i] == 1); // raising c only shrinks the set
    }

    // Coinciding poles accumulate before thresholding.
    const QuasiPshWeight twice(
        grid, {{{0.25, 0.25, 0.0, 0.0}, 0.4}, {{0.25, 0.25, 0.0, 0.0}, 0.7}}, bg);
    CHECK(count(singular_set(twice, 1.0)) == 1);
    CHECK(count(singular_set(twice, 1.2)) == 0);
}

TEST_CASE("log-model weight is sup-normalized with finite measured curvature") {
    const PeriodicGrid grid(1, 128);
    const auto bg = HermitianBackground::standard(1);
    const QuasiPshWeight psi(grid, {{{0.5, 0.5, 0.0, 0.0}, 3.0}}, bg);

    CHECK(psi.values().max() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(psi.values().min() < -10.0);
    CHECK(psi.truncation_floor() == doctest::Approx(grid.spacing()));
    CHECK(std::isfinite(psi.curvature_constant()));
    CHECK(psi.curvature_constant() >= 0.0);

    // The untruncated evaluation keeps the genuine log slope below one cell:
    // stepping r -> r/2 toward the pole loses c * log 2.
    const std::array<double, 4> z0{0.5, 0.5, 0.0, 0.0};
    const double r = 1e-4;
    const double a = psi.evaluate_untruncated({z0[0] + r, z0[1], 0.0, 0.0});
    const double b = psi.evaluate_untruncated({z0[0] + r / 2, z0[1], 0.0, 0.0});
    CHECK(a - b == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-4));

    // A pure smooth part stays bounded and still reports finite curvature.
    const QuasiPshWeight smooth(grid, {}, bg, 0.3);
    CHECK(smooth.values().min() > -1.0);
    CHECK(std::isfinite(smooth.curvature_constant()));
    CHECK(smooth.curvature_constant() > 0.0); // cosine has a concave part
}

TEST_CASE("fitted Lelong numbers match declared coefficients and add up") {
    const PeriodicGrid grid(1, 128);
    const auto bg = HermitianBackground::standard(1);

    const QuasiPshWeight psi(grid, {{{0.5, 0.5, 0.0, 0.0}, 3.0}}, bg);
    CHECK(lelong_number(psi, {0.5, 0.5, 0.0, 0.0}) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(std::abs(lelong_number(psi, {0.05, 0.05, 0.0, 0.0})) <= 0.15);

    const QuasiPshWeight smooth(grid, {}, bg, 0.3);
    CHECK(std::abs(lelong_number(smooth, {0.25, 0.5, 0.0, 0.0})) <= 0.05);

    // Additivity on the model family: coinciding poles sum their numbers.
    const QuasiPshWeight sum(
        grid, {{{0.5, 0.5, 0.0, 0.0}, 1.2}, {{0.5, 0.5, 0.0, 0.0}, 0.8}}, bg);
    CHECK(lelong_number(sum, {0.5, 0.5, 0.0, 0.0}) == doctest::Approx(2.0).epsilon(0.05));

    // Distinct poles fit their own coefficients.
    const QuasiPshWeight two(
        grid, {{{0.25, 0.25, 0.0, 0.0}, 1.5}, {{0.75, 0.75, 0.0, 0.0}, 0.7}}, bg);
    CHECK(lelong_number(two, {0.25, 0.25, 0.0, 0.0}) == doctest::Approx(1.5).epsilon(0.06));
    CHECK(lelong_number(two, {0.75, 0.75, 0.0, 0.0}) == doctest::Approx(0.7).epsilon(0.06));
}

TEST_CASE("Lelong fit works on the four-dimensional torus") {
    const PeriodicGrid grid(2, 16);
    const auto bg = HermitianBackground::standard(2);
    const QuasiPshWeight psi(grid, {{{0.5, 0.5, 0.5, 0.5}, 2.0}}, bg);

    CHECK(std::isfinite(psi.curvature_constant()));
    CHECK(lelong_number(psi, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::abs(lelong_number(psi, {0.1, 0.9, 0.1, 0.9})) <= 0.15);

    const auto mask = singular_set(psi, 0.5);
    CHECK(std::count(mask.begin(), mask.end(), 1) == 1);
    CHECK(mask[grid.pack({8, 8, 8, 8})] == 1);
}

TEST_CASE("relative bound report certifies the trivial weight") {
    const PeriodicGrid grid(1, 64);
    const auto bg = HermitianBackground::standard(1);
    const QuasiPshWeight psi(grid, {}, bg); // psi == 0

    GridFunction phi = GridFunction::sample(grid, [](const std::array<double, 4>& x) {
        return 0.5 * (std::cos(2.0 * kPi * x[0]) - 1.0);
    });

    const double beta = -phi.min() + 1e-12;
    const auto rep = relative_bound_check(phi, psi, 7.0, beta, 2.0);
    CHECK(rep.lower_bound_holds);
    CHECK(rep.worst_margin >= 0.0);
    CHECK(rep.singular_nodes == 0);
    REQUIRE(rep.min_phi_at_distance.size() == 9);
    for (double v : rep.min_phi_at_distance)
        CHECK(v == doctest::Approx(phi.min()));

    const auto bad = relative_bound_check(phi, psi, 7.0, 0.3 * beta, 2.0);
    CHECK_FALSE(bad.lower_bound_holds);
    CHECK(bad.worst_margin < 0.0);
}

TEST_CASE("relative bound margins localize at the pole and are scale-stable") {
    const auto bg = HermitianBackground::standard(1);
    auto build = [&](int res) {
        const PeriodicGrid grid(1, res);
        QuasiPshWeight psi(grid, {{{0.5, 0.5, 0.0, 0.0}, 3.0}}, bg);
        GridFunction phi(grid, 0.0);
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = 1.2 * psi.values()[i];
        return std::make_pair(std::move(psi), std::move(phi));
    };

    const auto [psi, phi] = build(64);
    // 1.2 psi >= 1.5 psi - 0.1 holds because psi <= 0.
    const auto ok = relative_bound_check(phi, psi, 1.5, 0.1, 2.0);
    CHECK(ok.lower_bound_holds);
    CHECK(ok.singular_nodes == 1);

    // Halving alpha flips the inequality near the pole but nowhere far away.
    const auto bad = relative_bound_check(phi, psi, 0.75, 0.1, 2.0);
    CHECK_FALSE(bad.lower_bound_holds);

    // Away-from-pole minima rise with the cell distance k ...
    REQUIRE(ok.min_phi_at_distance.size() >= 5);
    for (std::size_t k = 1; k < ok.min_phi_at_distance.size(); ++k)
        CHECK(ok.min_phi_at_distance[k] >= ok.min_phi_at_distance[k - 1]);
    CHECK(ok.min_phi_at_distance[4] > ok.min_phi_at_distance[0] + 1.0);

    // ... and depend on the physical distance, not the resolution: k cells at
    // res 64 matches 2k cells at res 128.
    const auto [psi2, phi2] = build(128);
    const auto fine = relative_bound_check(phi2, psi2, 1.5, 0.1, 2.0);
    CHECK(fine.min_phi_at_distance[4] ==
          doctest::Approx(ok.min_phi_at_distance[2]).epsilon(0.05));
    CHECK(fine.min_phi_at_distance[8] ==
          doctest::Approx(ok.min_phi_at_distance[4]).epsilon(0.05));
}

TEST_CASE("small Lelong numbers keep the reduced power integrable") {
    const auto bg = HermitianBackground::standard(1);
    DensitySpec spec;
    spec.kind = "exp-singular";
    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.strengths = {0.4}; // below 1/q = 0.5
    spec.q = 2.0;

    const double p = 1.5;
    const double r = 2.0 * p / (p + 1.0);
    CHECK(r > 1.0);
    CHECK(r < p);

    auto reduced_energy = [&](int res) {
        const PeriodicGrid grid(1, res);
        const GridMeasure mu = build_density(spec, grid, bg);
        std::vector<double> terms(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i)
            terms[i] = std::pow(mu.weight(i), r);
        return pairwise_sum(terms) * grid.cell_volume();
    };
    const double t64 = reduced_energy(64);
    const double t128 = reduced_energy(128);
    CHECK(std::isfinite(t64));
    CHECK(std::abs(t128 - t64) <= 0.05 * t64);
}

TEST_CASE("exponential moments of the log-model weight behave like powers") {
    const PeriodicGrid grid(1, 128);
    const auto bg = HermitianBackground::standard(1);
    const QuasiPshWeight psi(grid, {{{0.5, 0.5, 0.0, 0.0}, 3.0}}, bg);

    GridFunction flat(grid, 0.0);
    CHECK(skoda_integral(flat, 0.7) == doctest::Approx(1.0));

    const GridFunction& phi = psi.values();
    const double s03 = skoda_integral(phi, 0.3);
    const double s05 = skoda_integral(phi, 0.5);
    CHECK(std::isfinite(s05));
    CHECK(s03 > 1.0);       // phi <= 0 with mass below zero
    CHECK(s05 >= s03);      // monotone in lambda
    CHECK_THROWS_AS(skoda_integral(phi, -0.1), ParameterError);
}

TEST_CASE("orlicz-kind density is admissible for its gauge") {
    const PeriodicGrid grid(1, 128);
    const auto bg = HermitianBackground::standard(1);

    DensitySpec spec;
    spec.kind = "orlicz";
    spec.centers = {{0.25, 0.75, 0.0, 0.0}};
    spec.orlicz_m = 3.0;

    std::vector<double> caps;
    const GridMeasure mu = build_density(spec, grid, bg, &caps);
    CHECK(std::abs(mu.total_mass() - 1.0) <= 1e-10);
    REQUIRE(caps.size() == 1);
    CHECK(caps[0] > 1.0);

    const auto rep = orlicz_check(weights_as_function(mu), spec.orlicz_m);
    CHECK(rep.admissible);
    CHECK(rep.norm > 0.0);
}

TEST_CASE("density specs round-trip through JSON including nested factors") {
    DensitySpec g;
    g.kind = "manufactured";
    g.amplitude = 0.25;

    DensitySpec spec;
    spec.kind = "exp-singular";
    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.strengths = {3.0};
    spec.q = 2.0;
    spec.g_factor = std::make_shared<DensitySpec>(g);

    const DensitySpec back = density_spec_from_json(density_spec_to_json(spec));
    CHECK(back.kind == spec.kind);
    REQUIRE(back.centers.size() == 1);
    CHECK(back.centers[0] == spec.centers[0]);
    CHECK(back.strengths == spec.strengths);
    CHECK(back.q == spec.q);
    REQUIRE(back.g_factor != nullptr);
    CHECK(back.g_factor->kind == "manufactured");
    CHECK(back.g_factor->amplitude == 0.25);

    // Rebuilding from the round-tripped spec is bit-identical.
    const PeriodicGrid grid(1, 64);
    const auto bg = HermitianBackground::standard(1);
    const GridMeasure a = build_density(spec, grid, bg);
    const GridMeasure b = build_density(back, grid, bg);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.weight(i) == b.weight(i));

    // Defaults survive an empty document; garbage is rejected.
    const DensitySpec dflt = density_spec_from_json("{}");
    CHECK(dflt.kind == "uniform");
    CHECK(dflt.p == 1.5);
    CHECK_THROWS_AS(density_spec_from_json("not json"), IoError);
    CHECK_THROWS_AS(density_spec_from_json("{\"centers\": [[0, 0]]}"), IoError);

    WeightSpec ws;
    ws.data = {{{0.5, 0.5, 0.0, 0.0}, 3.0}, {{0.25, 0.25, 0.0, 0.0}, 0.5}};
    ws.smooth_amplitude = 0.2;
    const WeightSpec wback = weight_spec_from_json(weight_spec_to_json(ws));
    REQUIRE(wback.data.size() == 2);
    CHECK(wback.data[0].center == ws.data[0].center);
    CHECK(wback.data[1].coefficient == 0.5);
    CHECK(wback.smooth_amplitude == 0.2);
}

TEST_CASE("spec validation rejects inconsistent parameters") {
    const PeriodicGrid grid(1, 32);
    const auto bg = HermitianBackground::standard(1);

    DensitySpec spec;
    spec.kind = "mystery";
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);

    spec.kind = "lp-singular";
    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.strengths = {};
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);

    spec.kind = "manufactured";
    spec.amplitude = 0.6; // 0.6 * 1.7 > 0.95: positivity margin gone
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);

    spec = DensitySpec{};
    spec.kind = "exp-singular";
    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.strengths = {3.0};
    spec.q = 1.0;
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);

    spec.q = 2.0;
    spec.strengths = {-0.5};
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);

    spec = DensitySpec{};
    spec.kind = "orlicz";
    spec.centers = {{0.5, 0.5, 0.3, 0.0}}; // unused axis must stay zero
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);

    spec.centers = {{0.5, 0.5, 0.0, 0.0}};
    spec.orlicz_m = 0.0;
    CHECK_THROWS_AS(build_density(spec, grid, bg), ParameterError);
}
