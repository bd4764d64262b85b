#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmtspec/free_product.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace rmtspec;
using cplx = std::complex<double>;

TEST_CASE("product of two point masses is a point mass at the scalar product") {
    auto m2 = point_mass(2.0);
    auto m3 = point_mass(3.0);
    SolverConfig cfg;
    cfg.tolerance = 1e-13;
    for (cplx z : {cplx(0.3, 0.1), cplx(-1.0, 1.0), cplx(5.0, 0.5), cplx(9.0, 2.0)}) {
        auto st = solve_product(m2, m3, HalfPlanePoint(z.real(), z.imag()), cfg);
        CHECK(st.converged);
        CHECK(std::abs(st.g - 1.0 / (6.0 - z)) < 1e-12);
        CHECK(st.residual < 1e-13);
    }
}

TEST_CASE("multiplying by a point mass rescales the transform") {
    auto m = discretize_family(ExponentialFamily{1.0}, 128);
    auto two = point_mass(2.0);
    for (cplx z : {cplx(0.5, 0.5), cplx(3.0, 0.2), cplx(-0.5, 1.0)}) {
        auto st = solve_product(m, two, HalfPlanePoint(z.real(), z.imag()));
        CHECK(st.converged);
        cplx half = z / 2.0;
        cplx ref = transform(m, HalfPlanePoint(half.real(), half.imag())) / 2.0;
        CHECK(std::abs(st.g - ref) < 1e-9);
    }
}

TEST_CASE("identity factor preserves the spectrum") {
    auto m = SpectralMeasure({{0.5, 0.3}, {1.5, 0.45}, {4.0, 0.25}});
    auto one = point_mass(1.0);
    for (cplx z : {cplx(0.2, 0.3), cplx(2.0, 0.8), cplx(-2.0, 0.1)}) {
        HalfPlanePoint hp(z.real(), z.imag());
        auto st = solve_product(m, one, hp);
        CHECK(st.converged);
        CHECK(std::abs(st.g - transform(m, hp)) < 1e-10);
    }
}

TEST_CASE("two symmetric projector factors reproduce the frozen reference") {
    // Both factors bernoulli(1/2) on {0,1}; the free multiplicative convolution
    // has an explicit transform whose frozen value anchors this regression.
    auto b = discretize_family(BernoulliFamily{0.5, 0.0, 1.0}, 2);
    auto st = solve_product(b, b, HalfPlanePoint(-0.25, 0.05));
    CHECK(st.converged);
    CHECK(std::abs(st.g - cplx(2.80219457, 0.48944804)) < 1e-7);
    CHECK(st.pi1.imag() > 0.0);
    CHECK(st.pi2.imag() > 0.0);
}

TEST_CASE("solver state satisfies the subordination equations it reports") {
    auto m1 = discretize_family(UniformFamily{0.5, 2.0}, 64);
    auto m2 = discretize_family(ExponentialFamily{1.0}, 128);
    HalfPlanePoint z(1.3, 0.4);
    auto st = solve_product(m1, m2, z);
    REQUIRE(st.converged);
    cplx q = 1.0 - z.value() * st.pi1 * st.pi2;
    auto moment = [](const SpectralMeasure& m, cplx pi) {
        cplx acc = 0.0;
        for (const auto& a : m.atoms()) acc += a.weight / (1.0 + pi * a.location);
        return acc;
    };
    CHECK(std::abs(moment(m1, st.pi1) - 1.0 / q) < 1e-9);
    CHECK(std::abs(moment(m2, st.pi2) - 1.0 / q) < 1e-9);
    CHECK(std::abs(st.g - 1.0 / (z.value() * (z.value() * st.pi1 * st.pi2 - 1.0))) < 1e-9);
    CHECK(st.g.imag() > 0.0);
}

TEST_CASE("factor validation") {
    auto ok = point_mass(1.0);
    CHECK_THROWS_AS(solve_product(point_mass(0.0), ok, HalfPlanePoint(0.0, 1.0)),
                    DegenerateMeasure);
    CHECK_THROWS_AS(
        solve_product(SpectralMeasure({{-1.0, 0.5}, {2.0, 0.5}}), ok, HalfPlanePoint(0.0, 1.0)),
        UnsupportedFactorSign);
    CHECK_THROWS_AS(
        solve_product(ok, SpectralMeasure({{-1.0, 0.5}, {2.0, 0.5}}), HalfPlanePoint(0.0, 1.0)),
        UnsupportedFactorSign);
}

TEST_CASE("chain of two factors agrees with the direct two-factor solve") {
    auto m1 = discretize_family(UniformFamily{0.5, 1.5}, 64);
    auto m2 = SpectralMeasure({{0.5, 0.5}, {2.0, 0.5}});
    std::vector<HalfPlanePoint> grid;
    for (int k = 0; k < 12; ++k) grid.emplace_back(-0.3 + 0.35 * k, 0.35);
    auto chain = solve_product_chain({m1, m2}, grid, {});
    REQUIRE(chain.states.size() == grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        REQUIRE(chain.states[k].converged);
        auto direct = solve_product(m1, m2, grid[k]);
        CHECK(std::abs(chain.states[k].g - direct.g) < 1e-8);
    }
}

TEST_CASE("three projector factors concentrate the expected mass") {
    // Mean of a free product is the product of the means; three bernoulli(1/2)
    // factors on {0,1} have mean 1/8, and the rediscretized chain output keeps it.
    auto b = discretize_family(BernoulliFamily{0.5, 0.0, 1.0}, 2);
    auto chain = solve_product_chain({b, b, b}, {HalfPlanePoint(0.5, 0.5)}, {});
    CHECK(chain.measure.mean() == doctest::Approx(0.125).epsilon(0.16));
    CHECK(chain.measure.min_location() >= 0.0);
    CHECK(chain.measure.max_location() <= 1.0 + 1e-9);
    REQUIRE(chain.states.size() == 1);
    CHECK(chain.states[0].converged);
    CHECK(chain.states[0].g.imag() > 0.0);
}

TEST_CASE("chain of point masses multiplies the scalars") {
    auto chain = solve_product_chain({point_mass(2.0), point_mass(3.0), point_mass(5.0)},
                                     {HalfPlanePoint(1.0, 1.0)}, {});
    CHECK(chain.measure.mean() == doctest::Approx(30.0).epsilon(0.02));
    auto g = chain.states[0].g;
    CHECK(std::abs(g - 1.0 / (30.0 - cplx(1.0, 1.0))) < 0.02);
}
