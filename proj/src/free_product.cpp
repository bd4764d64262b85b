#include "rmtspec/free_product.hpp"

#include <cmath>
#include <limits>

namespace rmtspec {
namespace {

using cplx = std::complex<double>;

constexpr double kChainEpsilon = 1e-3;
constexpr int kChainGridPoints = 4096;
constexpr int kChainAtoms = 512;
constexpr double kChainMargin = 0.25;

cplx expect_inv(const SpectralMeasure& m, cplx p) {  // E[1/(1 + p X)]
    cplx s = 0.0;
    for (const Atom& a : m.atoms()) s += a.weight / (1.0 + p * a.location);
    return s;
}

cplx expect_inv_dx(const SpectralMeasure& m, cplx p) {  // E[X/(1 + p X)^2]
    cplx s = 0.0;
    for (const Atom& a : m.atoms()) {
        cplx d = 1.0 + p * a.location;
        s += a.weight * a.location / (d * d);
    }
    return s;
}

cplx eta(const SpectralMeasure& m, cplx om) {  // 1 - 1/E[1/(1 - om X)]
    cplx e = 0.0;
    for (const Atom& a : m.atoms()) e += a.weight / (1.0 - om * a.location);
    return 1.0 - 1.0 / e;
}

double residual_at(const SpectralMeasure& m1, const SpectralMeasure& m2, cplx z, cplx p1, cplx p2,
                   cplx& g_out) {
    cplx den = z * (z * p1 * p2 - 1.0);
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    cplx g = 1.0 / den;
    double r = std::max(std::abs(g - (-1.0 / z) * expect_inv(m1, p1)),
                        std::abs(g - (-1.0 / z) * expect_inv(m2, p2)));
    g_out = g;
    return r;
}

void check_factor(const SpectralMeasure& m) {
    if (m.support_bound() == 0.0) throw DegenerateMeasure("factor measure has all mass at zero");
    if (m.min_location() < 0.0)
        throw UnsupportedFactorSign("product factors must be supported on [0, inf)");
}

ProductFixedPointState solve_product_from(const SpectralMeasure& m1, const SpectralMeasure& m2,
                                          cplx z, const SolverConfig& cfg, cplx init_pi1,
                                          cplx init_pi2) {
    // multiplicative subordination in omega_j = -pi_j; the analytic iteration
    // keeps pi_j in the upper half-plane and repels the spurious root at
    // pi = (-1/z, 0)
    cplx u = 1.0 / z;
    if (!(init_pi1.imag() > 0.0)) init_pi1 = cplx(0.0, 1.0);
    if (!(init_pi2.imag() > 0.0)) init_pi2 = cplx(0.0, 1.0);
    cplx om[2] = {-init_pi1, -init_pi2};
    cplx g = 0.0;
    double res = residual_at(m1, m2, z, -om[0], -om[1], g);
    int it = 0;
    bool newton = false;
    ProductFixedPointState st;
    while (it < cfg.max_iterations && res > cfg.tolerance) {
        ++it;
        if (!newton) {
            bool guarded = false;
            cplx t1 = u * eta(m2, om[1]) / om[1];
            double d = cfg.damping;
            for (int h = 0;; ++h) {
                cplx c = om[0] + d * (t1 - om[0]);
                if ((-c).imag() > 0.0) {
                    om[0] = c;
                    break;
                }
                d *= 0.5;
                if (h >= 60) {
                    guarded = true;
                    break;
                }
            }
            if (guarded) break;
            cplx t2 = u * eta(m1, om[0]) / om[0];
            d = cfg.damping;
            for (int h = 0;; ++h) {
                cplx c = om[1] + d * (t2 - om[1]);
                if ((-c).imag() > 0.0) {
                    om[1] = c;
                    break;
                }
                d *= 0.5;
                if (h >= 60) {
                    guarded = true;
                    break;
                }
            }
            if (guarded) break;
            res = residual_at(m1, m2, z, -om[0], -om[1], g);
            if (res < 1e-3) newton = true;
        } else {
            cplx p1 = -om[0], p2 = -om[1];
            cplx q = 1.0 - z * p1 * p2;
            if (q == 0.0) {
                newton = false;
                continue;
            }
            cplx f1 = expect_inv(m1, p1) - 1.0 / q;
            cplx f2 = expect_inv(m2, p2) - 1.0 / q;
            cplx a11 = -expect_inv_dx(m1, p1) - z * p2 / (q * q);
            cplx a12 = -z * p1 / (q * q);
            cplx a21 = -z * p2 / (q * q);
            cplx a22 = -expect_inv_dx(m2, p2) - z * p1 / (q * q);
            cplx det = a11 * a22 - a12 * a21;
            if (det == 0.0) {
                newton = false;
                continue;
            }
            cplx s1 = (-f1 * a22 + f2 * a12) / det;
            cplx s2 = (-a11 * f2 + a21 * f1) / det;
            double d = 1.0;
            bool improved = false;
            for (int h = 0; h < 61; ++h) {
                cplx c1 = p1 + d * s1;
                cplx c2 = p2 + d * s2;
                if (c1.imag() > 0.0 && c2.imag() > 0.0) {
                    cplx gc = 0.0;
                    double nr = residual_at(m1, m2, z, c1, c2, gc);
                    if (nr < res) {
                        om[0] = -c1;
                        om[1] = -c2;
                        res = nr;
                        g = gc;
                        improved = true;
                        break;
                    }
                }
                d *= 0.5;
            }
            if (!improved) newton = false;
        }
    }
    st.g = g;
    st.pi1 = -om[0];
    st.pi2 = -om[1];
    st.residual = res;
    st.iterations = it;
    st.converged = res <= cfg.tolerance && g.imag() > 0.0 && st.pi1.imag() > 0.0 &&
                   st.pi2.imag() > 0.0;
    return st;
}

}  // namespace

ProductFixedPointState solve_product(const SpectralMeasure& m1, const SpectralMeasure& m2,
                                     HalfPlanePoint z, const SolverConfig& cfg) {
    validate(cfg);
    check_factor(m1);
    check_factor(m2);
    ProductFixedPointState st =
        solve_product_from(m1, m2, z.value(), cfg, cplx(0.0, 1.0), cplx(0.0, 1.0));
    if (!st.converged) throw NonConvergence("product solver did not reach the tolerance");
    if (cfg.check_ambiguity) {
        ProductFixedPointState st2 =
            solve_product_from(m1, m2, z.value(), cfg, cplx(0.0, 2.0), cplx(0.0, 2.0));
        if (st2.converged) {
            double diff = std::max({std::abs(st.g - st2.g), std::abs(st.pi1 - st2.pi1),
                                    std::abs(st.pi2 - st2.pi2)});
            if (diff > 100.0 * cfg.tolerance)
                throw AmbiguousFixedPoint("two admissible starts reached different states");
        }
    }
    return st;
}

namespace {

SpectralMeasure rediscretize(const std::vector<double>& x, const std::vector<double>& density,
                             int atom_count) {
    std::vector<double> cdf = cdf_from_density(x, density);
    double total = cdf.back();
    if (!(total > 0.0)) throw InversionFailed("inversion recovered no spectral mass");
    std::vector<double> locs;
    locs.reserve(atom_count);
    std::size_t seg = 1;
    for (int k = 0; k < atom_count; ++k) {
        double u = total * (k + 0.5) / atom_count;
        while (seg + 1 < cdf.size() && cdf[seg] < u) ++seg;
        double f0 = cdf[seg - 1], f1 = cdf[seg];
        double q = f1 > f0 ? x[seg - 1] + (x[seg] - x[seg - 1]) * (u - f0) / (f1 - f0) : x[seg];
        // factors are nonnegative, so spurious sub-zero quantiles from the
        // smoothing tail are clamped back to the support
        locs.push_back(std::max(q, 0.0));
    }
    return from_samples(locs);
}

}  // namespace

ProductChainResult solve_product_chain(const std::vector<SpectralMeasure>& measures,
                                       std::vector<HalfPlanePoint> z_grid,
                                       std::vector<double> inversion_grid,
                                       const SolverConfig& cfg) {
    validate(cfg);
    if (measures.size() < 2) throw InvalidMeasure("chain needs at least two factor measures");
    for (const SpectralMeasure& m : measures) check_factor(m);

    if (inversion_grid.empty()) {
        double bound = 1.0;
        for (const SpectralMeasure& m : measures) bound *= m.support_bound();
        double lo = -(1.0 + kChainMargin) * bound;
        double hi = (1.0 + kChainMargin) * bound;
        inversion_grid.resize(kChainGridPoints);
        for (int k = 0; k < kChainGridPoints; ++k)
            inversion_grid[k] = lo + (hi - lo) * k / (kChainGridPoints - 1);
    }
    if (z_grid.empty()) {
        z_grid.reserve(inversion_grid.size());
        for (double x : inversion_grid) z_grid.emplace_back(x, kChainEpsilon);
    }

    SpectralMeasure acc = measures[0];
    ProductChainResult out{acc, {}};
    for (std::size_t link = 1; link < measures.size(); ++link) {
        const SpectralMeasure& next = measures[link];
        bool last = link + 1 == measures.size();

        // one warm-started pass along the inversion line gives the density
        cplx warm1(0.0, 1.0), warm2(0.0, 1.0);
        bool have_warm = false;
        std::vector<double> density;
        density.reserve(inversion_grid.size());
        for (double x : inversion_grid) {
            cplx z(x, kChainEpsilon);
            ProductFixedPointState st = solve_product_from(
                acc, next, z, cfg, have_warm ? warm1 : cplx(0.0, 1.0),
                have_warm ? warm2 : cplx(0.0, 1.0));
            if (!st.converged && have_warm)
                st = solve_product_from(acc, next, z, cfg, cplx(0.0, 1.0), cplx(0.0, 1.0));
            if (!st.converged)
                throw NonConvergence("chain link failed on the inversion grid");
            double d = st.g.imag() / M_PI;
            if (d < -1e-8) throw InversionFailed("chain link produced a negative density");
            density.push_back(std::max(d, 0.0));
            warm1 = st.pi1;
            warm2 = st.pi2;
            have_warm = true;
        }

        if (last) {
            out.states.clear();
            for (const HalfPlanePoint& z : z_grid) {
                ProductFixedPointState st = solve_product_from(acc, next, z.value(), cfg,
                                                               cplx(0.0, 1.0), cplx(0.0, 1.0));
                out.states.push_back(std::move(st));
            }
        }
        acc = rediscretize(inversion_grid, density, kChainAtoms);
    }
    out.measure = acc;
    return out;
}

}  // namespace rmtspec
