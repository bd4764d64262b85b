#pragma once

#include <complex>
#include <vector>

#include "rmtspec/measure.hpp"
#include "rmtspec/solver_config.hpp"
#include "rmtspec/stieltjes.hpp"

namespace rmtspec {

struct ProductFixedPointState {
    std::complex<double> g;
    std::complex<double> pi1;
    std::complex<double> pi2;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Spectral distribution of a two-factor product of independently rotated
// nonnegative matrices.  Throws NonConvergence on failure.
ProductFixedPointState solve_product(const SpectralMeasure& m1, const SpectralMeasure& m2,
                                     HalfPlanePoint z, const SolverConfig& cfg = {});

struct ProductChainResult {
    SpectralMeasure measure;                      // re-discretized final distribution
    std::vector<ProductFixedPointState> states;   // last link, one per z_grid point
};

// Left fold over three or more factors: solve the two-factor problem, invert
// the transform to a density on inversion_grid, re-discretize to quantile
// atoms, and feed the result into the next factor.  Empty grids select the
// defaults: 4096 inversion points on [-1.25, 1.25] scaled by the product of
// the support bounds, and the same points lifted into the half-plane.
ProductChainResult solve_product_chain(const std::vector<SpectralMeasure>& measures,
                                       std::vector<HalfPlanePoint> z_grid,
                                       std::vector<double> inversion_grid,
                                       const SolverConfig& cfg = {});

}  // namespace rmtspec
