#pragma once

#include <string>
#include <vector>

namespace pshlab {

// Outcome of one acceptance criterion: a stable id ("A1".."A9"), the
// verdict, a one-line summary with the measured numbers, and wall time.
// Each criterion's runtime budget is part of its verdict.
struct AcceptanceResult {
    std::string id;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the acceptance programme — every criterion, or just those named in
// `only` (ids are matched case-insensitively).  Scratch outputs (scenario
// runs) land under scratch_dir, which is created if missing.  A criterion
// that throws is reported failed with the error text; the function itself
// only throws if the scratch directory cannot be created.
std::vector<AcceptanceResult> run_acceptance(const std::string& scratch_dir,
                                             const std::vector<std::string>& only = {});

// "A3 PASS  12.3s  osc <= T at every res ..." — one line per criterion.
std::string format_acceptance_line(const AcceptanceResult& r);

} // namespace pshlab
