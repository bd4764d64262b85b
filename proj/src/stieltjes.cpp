#include "rmtspec/stieltjes.hpp"

#include <cmath>

namespace rmtspec {
namespace {

constexpr double kNegativeDensityTol = 1e-8;

void require_strictly_increasing(const std::vector<double>& x) {
    if (x.size() < 2) throw InvalidGrid("grid needs at least two points");
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k])) throw InvalidGrid("grid values must be finite");
        if (k > 0 && x[k] <= x[k - 1]) throw InvalidGrid("grid must be strictly increasing");
    }
}

}  // namespace

HalfPlanePoint::HalfPlanePoint(double re_, double im_) : re(re_), im(im_) {
    if (!std::isfinite(re) || !std::isfinite(im) || !(im > 0.0))
        throw InvalidGrid("evaluation point must lie in the open upper half-plane");
}

TransformValue transform(const SpectralMeasure& m, HalfPlanePoint z) {
    std::complex<double> zc = z.value();
    std::complex<double> g = 0.0;
    for (const Atom& a : m.atoms()) g += a.weight / (a.location - zc);
    return g;
}

std::vector<double> invert_density(
    const std::function<std::complex<double>(std::complex<double>)>& g,
    const std::vector<double>& x_grid, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidGrid("epsilon must be positive");
    require_strictly_increasing(x_grid);
    std::vector<double> density;
    density.reserve(x_grid.size());
    for (double x : x_grid) {
        std::complex<double> v = g({x, epsilon});
        double d = v.imag() / M_PI;
        if (!std::isfinite(d) || d < -kNegativeDensityTol)
            throw InversionFailed("evaluator is not a Herglotz boundary trace");
        density.push_back(std::max(d, 0.0));
    }
    return density;
}

std::vector<double> cdf_from_density(const std::vector<double>& x_grid,
                                     const std::vector<double>& density) {
    require_strictly_increasing(x_grid);
    if (density.size() != x_grid.size())
        throw InvalidGrid("density and grid sizes differ");
    for (double d : density) {
        if (!std::isfinite(d) || d < 0.0) throw InvalidGrid("density must be nonnegative");
    }
    std::vector<double> cdf(x_grid.size());
    double acc = 0.0;
    cdf[0] = 0.0;
    for (std::size_t k = 1; k < x_grid.size(); ++k) {
        acc += 0.5 * (density[k] + density[k - 1]) * (x_grid[k] - x_grid[k - 1]);
        cdf[k] = std::min(std::max(acc, 0.0), 1.0);
    }
    return cdf;
}

}  // namespace rmtspec
