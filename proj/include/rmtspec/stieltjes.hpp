#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "rmtspec/measure.hpp"

namespace rmtspec {

using TransformValue = std::complex<double>;

// Point of the open upper half-plane; the constructor enforces im > 0.
struct HalfPlanePoint {
    double re = 0.0;
    double im = 1.0;

    HalfPlanePoint(double re_, double im_);
    std::complex<double> value() const { return {re, im}; }
};

// G(z) = E[1/(X - z)], z in the upper half-plane.
TransformValue transform(const SpectralMeasure& m, HalfPlanePoint z);

// Density recovered from the boundary values Im g(x + i*epsilon)/pi.  Tiny
// negative values are clipped to zero; anything below -1e-8 means the
// evaluator is not a Herglotz boundary trace and raises InversionFailed.
std::vector<double> invert_density(
    const std::function<std::complex<double>(std::complex<double>)>& g,
    const std::vector<double>& x_grid, double epsilon);

// Trapezoid cumulative of a sampled density, clipped to [0, 1].
std::vector<double> cdf_from_density(const std::vector<double>& x_grid,
                                     const std::vector<double>& density);

}  // namespace rmtspec
