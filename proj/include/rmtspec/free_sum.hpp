#pragma once

#include <complex>
#include <vector>

#include "rmtspec/measure.hpp"
#include "rmtspec/solver_config.hpp"
#include "rmtspec/stieltjes.hpp"

namespace rmtspec {

struct SumFixedPointState {
    std::complex<double> g;
    std::vector<std::complex<double>> rho;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Spectral distribution of a sum of independently rotated matrices, one
// summand per measure.  Throws NonConvergence if the residual never reaches
// cfg.tolerance.
SumFixedPointState solve_sum(const std::vector<SpectralMeasure>& measures, HalfPlanePoint z,
                             const SolverConfig& cfg = {});

// Grid sweep with warm starts; failures are recorded per point (converged
// flag) instead of thrown, so one bad point does not lose the rest.
std::vector<SumFixedPointState> solve_sum_grid(const std::vector<SpectralMeasure>& measures,
                                               const std::vector<HalfPlanePoint>& z_grid,
                                               const SolverConfig& cfg = {});

}  // namespace rmtspec
