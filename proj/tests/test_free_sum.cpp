#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmtspec/free_sum.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace rmtspec;
using cplx = std::complex<double>;

TEST_CASE("single summand reduces to the plain transform") {
    auto m = SpectralMeasure({{0.5, 0.3}, {2.0, 0.7}});
    HalfPlanePoint z(0.4, 0.8);
    auto st = solve_sum({m}, z);
    CHECK(st.converged);
    CHECK(st.iterations == 0);
    CHECK(st.residual == 0.0);
    CHECK(std::abs(st.g - transform(m, z)) < 1e-15);
    REQUIRE(st.rho.size() == 1);
    CHECK(std::abs(st.rho[0] + 1.0 / z.value()) < 1e-15);
}

TEST_CASE("sum of two point masses is a shifted point mass") {
    auto m2 = point_mass(2.0);
    auto m3 = point_mass(3.0);
    SolverConfig cfg;
    cfg.tolerance = 1e-13;
    for (cplx z : {cplx(0.3, 0.1), cplx(0.3, 2.0), cplx(-4.0, 0.5), cplx(8.0, 1.0)}) {
        auto st = solve_sum({m2, m3}, HalfPlanePoint(z.real(), z.imag()), cfg);
        CHECK(st.converged);
        CHECK(std::abs(st.g - 1.0 / (5.0 - z)) < 1e-12);
        CHECK(st.residual < 1e-13);
    }
}

TEST_CASE("adding a point mass translates the transform") {
    auto m = discretize_family(UniformFamily{0.0, 2.0}, 64);
    auto shift = point_mass(1.0);
    for (cplx z : {cplx(0.0, 1.0), cplx(2.5, 0.3), cplx(-1.0, 0.7)}) {
        auto st = solve_sum({m, shift}, HalfPlanePoint(z.real(), z.imag()));
        CHECK(st.converged);
        cplx shifted = z - 1.0;
        cplx ref = shifted.imag() > 0.0 ? transform(m, HalfPlanePoint(shifted.real(), shifted.imag()))
                                        : cplx(0.0, 0.0);
        CHECK(std::abs(st.g - ref) < 1e-9);
    }
}

TEST_CASE("subordination state is internally consistent") {
    auto m1 = discretize_family(SemicircleFamily{1.0}, 256);
    auto m2 = discretize_family(UniformFamily{0.0, 1.0}, 64);
    auto m3 = SpectralMeasure({{-1.0, 0.5}, {1.0, 0.5}});
    HalfPlanePoint z(0.2, 0.4);
    auto st = solve_sum({m1, m2, m3}, z);
    REQUIRE(st.converged);
    REQUIRE(st.rho.size() == 3);
    // Each rho_j is -1/omega_j with Im omega_j > 0, all omega_j reproducing the
    // same transform value, and the defect identity sums back to z.
    const SpectralMeasure* ms[] = {&m1, &m2, &m3};
    cplx omega_sum = 0.0;
    for (int j = 0; j < 3; ++j) {
        cplx omega = -1.0 / st.rho[j];
        REQUIRE(omega.imag() > 0.0);
        omega_sum += omega;
        auto gj = transform(*ms[j], HalfPlanePoint(omega.real(), omega.imag()));
        CHECK(std::abs(gj - st.g) < 1e-9);
    }
    cplx s = z.value() - omega_sum;
    CHECK(std::abs(st.g - 2.0 / s) < 1e-9);
    CHECK(st.g.imag() > 0.0);
}

TEST_CASE("grid solve with warm starts matches pointwise cold solves") {
    auto m1 = discretize_family(ExponentialFamily{1.0}, 128);
    auto m2 = SpectralMeasure({{-1.0, 0.5}, {1.0, 0.5}});
    std::vector<HalfPlanePoint> grid;
    for (int k = 0; k < 24; ++k) grid.emplace_back(0.3, 0.05 + 0.1 * k);
    auto warm = solve_sum_grid({m1, m2}, grid);
    REQUIRE(warm.size() == grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        REQUIRE(warm[k].converged);
        auto cold = solve_sum({m1, m2}, grid[k]);
        CHECK(std::abs(warm[k].g - cold.g) < 1e-9);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(solve_sum({}, HalfPlanePoint(0.0, 1.0)), InvalidMeasure);
    CHECK_THROWS_AS(solve_sum({point_mass(0.0), point_mass(0.0)}, HalfPlanePoint(0.0, 1.0)),
                    DegenerateMeasure);
    SolverConfig bad;
    bad.damping = 2.0;
    CHECK_THROWS_AS(solve_sum({point_mass(1.0), point_mass(2.0)}, HalfPlanePoint(0.0, 1.0), bad),
                    Error);
}

TEST_CASE("ambiguity check accepts a well-conditioned point") {
    auto m1 = discretize_family(SemicircleFamily{1.0}, 128);
    auto m2 = discretize_family(SemicircleFamily{1.0}, 128);
    SolverConfig cfg;
    cfg.check_ambiguity = true;
    auto st = solve_sum({m1, m2}, HalfPlanePoint(0.0, 1.0), cfg);
    CHECK(st.converged);
    // Two semicircles sum to a variance-2 semicircle.
    cplx z(0.0, 1.0);
    cplx ref = (-z + std::sqrt(z * z - 8.0)) / 4.0;
    if (ref.imag() < 0.0) ref = (-z - std::sqrt(z * z - 8.0)) / 4.0;
    CHECK(std::abs(st.g - ref) < 1e-4);
}
