#include <cmath>
#include <random>

#include "doctest.h"
#include "pshlab/errors.hpp"
#include "pshlab/ma_solver.hpp"

using namespace pshlab;

namespace {

constexpr double kKappa = 2.0;

double sup_profile_error(const RadialProfile& p,
                         const std::function<double(double)>& exact) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.radii.size(); ++i)
        worst = std::max(worst, std::abs(p.v[i] - exact(p.radii[i])));
    return worst;
}

// centered second difference along one axis of a function of position
template <typename F>
double second_diff(const F& u, std::array<double, 4> p, int axis, double h) {
    auto at = [&](double d) {
        auto q = p;
        q[axis] += d;
        return u(q);
    };
    return (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
}

template <typename F>
double mixed_diff(const F& u, std::array<double, 4> p, int a, int b, double h) {
    auto at = [&](double da, double db) {
        auto q = p;
        q[a] += da;
        q[b] += db;
        return u(q);
    };
    return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
}

} // namespace

TEST_CASE("zero density gives the zero potential") {
    const auto p = solve_radial_ball([](double) { return 0.0; }, 2);
    p.validate();
    CHECK(p.total_mass == 0.0);
    for (double vi : p.v) CHECK(vi == 0.0);
    CHECK(p.value_at(0.5) == 0.0);
}

TEST_CASE("point mass at the center produces the logarithmic profile") {
    const double r_min = 1e-3;
    const double m0 = 0.7;
    const double amp = m0 / (M_PI * r_min * r_min);
    auto density = [&](double rho) { return rho < r_min ? amp : 0.0; };
    const auto p = solve_radial_ball(density, 1, {}, 800, r_min);
    p.validate();
    CHECK(p.total_mass == doctest::Approx(m0).epsilon(1e-10));
    const double coeff = 2.0 * m0 / (kKappa * M_PI);
    const double err = sup_profile_error(p, [&](double r) { return coeff * std::log(r); });
    CHECK(err <= 1e-10);
    // the inward extension continues the logarithm exactly
    CHECK(p.value_at(1e-4) == doctest::Approx(coeff * std::log(1e-4)).epsilon(1e-9));
}

TEST_CASE("constant density on the four-dimensional ball has a quadratic potential") {
    const double f0 = 2.0 / (M_PI * M_PI);  // probability normalization
    const auto p = solve_radial_ball([&](double) { return f0; }, 2, {}, 1600);
    p.validate();
    CHECK(p.total_mass == doctest::Approx(1.0).epsilon(1e-10));
    const double err = sup_profile_error(
        p, [](double r) { return -(1.0 - r * r) / (std::sqrt(2.0) * M_PI); });
    CHECK(err <= 2e-6);
}

TEST_CASE("integrable inverse-root singularity is handled") {
    // density rho^{-3/2}: cumulative mass 4 pi sqrt(r), potential -8 (1 - sqrt r)
    const auto p = solve_radial_ball(
        [](double rho) { return std::pow(rho, -1.5); }, 1, {}, 800);
    p.validate();
    const double err = sup_profile_error(
        p, [](double r) { return -8.0 * (1.0 - std::sqrt(r)); });
    CHECK(err <= 1e-3);
    CHECK(p.total_mass == doctest::Approx(4.0 * M_PI).epsilon(1e-4));
}

TEST_CASE("non-integrable densities are rejected") {
    CHECK_THROWS_AS(solve_radial_ball([](double r) { return 1.0 / (r * r); }, 1),
                    NonIntegrable);
    CHECK_THROWS_AS(
        solve_radial_ball([](double r) { return 1.0 / (r * r * r * r); }, 2),
        NonIntegrable);
}

TEST_CASE("input validation") {
    auto one = [](double) { return 1.0; };
    CHECK_THROWS_AS(solve_radial_ball(one, 3), ParameterError);
    CHECK_THROWS_AS(solve_radial_ball(one, 1, {}, 8), ParameterError);
    CHECK_THROWS_AS(solve_radial_ball(one, 1, {}, 800, 0.7), ParameterError);
    CHECK_THROWS_AS(solve_radial_ball([](double) { return -1.0; }, 1), ParameterError);
    const auto p = solve_radial_ball(one, 1);
    CHECK_THROWS_AS(p.value_at(0.0), ParameterError);
    CHECK(p.value_at(1.0) == 0.0);
    CHECK(p.value_at(3.0) == 0.0);
}

TEST_CASE("larger density gives a deeper potential") {
    for (int n : {1, 2}) {
        const auto lo = solve_radial_ball([](double) { return 1.0; }, n);
        const auto hi = solve_radial_ball([](double r) { return 1.0 + r * r; }, n);
        for (std::size_t i = 0; i < lo.radii.size(); ++i) CHECK(lo.v[i] >= hi.v[i]);
    }
}

TEST_CASE("profile reproduces the finite-difference determinant on a planar slice") {
    // n = 1, unit density: the potential must satisfy (kappa/4) Lap u = 1 at
    // interior points of the disk, checked with centered differences applied
    // to the interpolated profile
    const auto p = solve_radial_ball([](double) { return 1.0; }, 1, {}, 3200);
    auto u = [&](const std::array<double, 4>& q) {
        return p.value_at(std::hypot(q[0], q[1]));
    };
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> radius(0.25, 0.85), angle(0.0, 2.0 * M_PI);
    const double h = 0.05;
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const double r = radius(gen), th = angle(gen);
        const std::array<double, 4> q{r * std::cos(th), r * std::sin(th), 0.0, 0.0};
        const double det =
            (kKappa / 4.0) * (second_diff(u, q, 0, h) + second_diff(u, q, 1, h));
        worst = std::max(worst, std::abs(det - 1.0));
    }
    CHECK(worst <= 1e-2);
}

TEST_CASE("profile reproduces the finite-difference determinant on the full ball") {
    // n = 2: determinant of the centered-difference complex Hessian of the
    // interpolated profile matches the density at interior points
    const double f0 = 2.0 / (M_PI * M_PI);
    const auto p = solve_radial_ball([&](double) { return f0; }, 2, {}, 3200);
    auto u = [&](const std::array<double, 4>& q) {
        return p.value_at(
            std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]));
    };
    std::mt19937 gen(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.3, 0.85);
    const double h = 0.05;
    const double q4 = kKappa / 4.0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 4> dir{gauss(gen), gauss(gen), gauss(gen), gauss(gen)};
        const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] +
                                     dir[2] * dir[2] + dir[3] * dir[3]);
        if (len < 1e-8) continue;
        const double r = radius(gen);
        std::array<double, 4> q;
        for (int a = 0; a < 4; ++a) q[a] = dir[a] / len * r;
        const double h11 = q4 * (second_diff(u, q, 0, h) + second_diff(u, q, 1, h));
        const double h22 = q4 * (second_diff(u, q, 2, h) + second_diff(u, q, 3, h));
        const double re12 = q4 * (mixed_diff(u, q, 0, 2, h) + mixed_diff(u, q, 1, 3, h));
        const double im12 = q4 * (mixed_diff(u, q, 0, 3, h) - mixed_diff(u, q, 1, 2, h));
        const double det = h11 * h22 - re12 * re12 - im12 * im12;
        worst = std::max(worst, std::abs(det - f0) / f0);
    }
    CHECK(worst <= 1e-2);
}
