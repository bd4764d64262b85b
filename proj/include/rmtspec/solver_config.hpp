#pragma once

#include "rmtspec/errors.hpp"

namespace rmtspec {

struct SolverConfig {
    double tolerance = 1e-10;
    int max_iterations = 10000;
    double damping = 0.5;  // relaxation factor in (0, 1]
    // When set, every solve is repeated from a second admissible start and
    // AmbiguousFixedPoint is raised if the two converged states differ by
    // more than 100 * tolerance.
    bool check_ambiguity = false;
};

void validate(const SolverConfig& cfg);

}  // namespace rmtspec
