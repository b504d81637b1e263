// Acceptance programme: each case runs one criterion end to end and prints a
// single PASS/FAIL line with the measured numbers.  Criterion tolerances and
// runtime budgets live in src/acceptance.cpp; a case fails if its criterion's
// verdict (including the time budget) is negative.
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "pshlab/acceptance.hpp"

using namespace pshlab;

namespace {

bool run_one(const char* id) {
    const std::vector<AcceptanceResult> res = run_acceptance("acceptance_scratch", {id});
    REQUIRE(res.size() == 1);
    std::printf("%s\n", format_acceptance_line(res[0]).c_str());
    std::fflush(stdout);
    return res[0].pass;
}

} // namespace

TEST_CASE("A1: manufactured smooth solution, accuracy and convergence order") {
    CHECK(run_one("A1"));
}

TEST_CASE("A2: envelope off-contact mass, idempotence, monotonicity") {
    CHECK(run_one("A2"));
}

TEST_CASE("A3: oscillation certificate sound across a resolution ladder") {
    CHECK(run_one("A3"));
}

TEST_CASE("A4: weighted-envelope contact inequality on random pairs") {
    CHECK(run_one("A4"));
}

TEST_CASE("A5: scaled-background family under one certificate") {
    CHECK(run_one("A5"));
}

TEST_CASE("A6: singular-weight relative bound and masked minima") {
    CHECK(run_one("A6"));
}

TEST_CASE("A7: radial ball solver, moment bounds and 4-D cross-validation") {
    CHECK(run_one("A7"));
}

TEST_CASE("A8: growth-bound engine against the independent ODE oracle") {
    CHECK(run_one("A8"));
}

TEST_CASE("A9: contact-inequality and domination property suites") {
    CHECK(run_one("A9"));
}
