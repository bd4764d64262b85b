#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmtspec/cdma.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace rmtspec;
using cplx = std::complex<double>;

namespace {

CdmaScenario equal_power_scenario(double alpha, double power, double noise, SignatureKind kind) {
    return CdmaScenario{{{alpha, kind, point_mass(power)}},
                        joint_independent({point_mass(1.0)}),
                        noise};
}

// Positive root of sigma2*P*rho^2 + (sigma2 + alpha*P - P)*rho - 1 = 0, the
// classical large-system limit for equal-power i.i.d. signatures on a flat channel.
double equal_power_reference(double alpha, double power, double sigma2) {
    double a = sigma2 * power;
    double b = sigma2 + alpha * power - power;
    return (-b + std::sqrt(b * b + 4.0 * a)) / (2.0 * a);
}

}  // namespace

TEST_CASE("scenario validation") {
    auto chan = joint_independent({point_mass(1.0)});
    CHECK_THROWS_AS(validate({{{0.5, SignatureKind::iid, point_mass(1.0)}}, chan, -0.1}),
                    InvalidScenario);
    CHECK_THROWS_AS(validate({{{-0.5, SignatureKind::iid, point_mass(1.0)}}, chan, 0.1}),
                    InvalidScenario);
    CHECK_THROWS_AS(validate({{}, chan, 0.1}), InvalidScenario);
    CHECK_THROWS_AS(
        validate({{{0.5, SignatureKind::iid, SpectralMeasure({{-1.0, 0.5}, {1.0, 0.5}})}}, chan,
                  0.1}),
        InvalidScenario);
    CHECK_THROWS_AS(validate({{{0.5, SignatureKind::iid, point_mass(0.0)}}, chan, 0.1}),
                    DegenerateMeasure);
    auto chan2 = joint_independent({point_mass(1.0), point_mass(1.0)});
    CHECK_THROWS_AS(validate({{{0.5, SignatureKind::iid, point_mass(1.0)}}, chan2, 0.1}),
                    InvalidScenario);

    CHECK_THROWS_AS(
        validate({{{1.25, SignatureKind::isometric, point_mass(1.0)}}, chan, 0.1}),
        InvalidScenario);
    try {
        validate({{{1.25, SignatureKind::isometric, point_mass(1.0)}}, chan, 0.1});
    } catch (const InvalidScenario& e) {
        CHECK(std::string(e.what()).find("isometric requires alpha <= 1") != std::string::npos);
    }
    CHECK_NOTHROW(validate({{{1.25, SignatureKind::iid, point_mass(1.0)}}, chan, 0.1}));
}

TEST_CASE("signature kind string round trip") {
    CHECK(to_string(SignatureKind::iid) == "iid");
    CHECK(to_string(SignatureKind::isometric) == "isometric");
    CHECK(signature_kind_from_string("iid") == SignatureKind::iid);
    CHECK(signature_kind_from_string("isometric") == SignatureKind::isometric);
    CHECK_THROWS_AS(signature_kind_from_string("fourier"), InvalidScenario);
}

TEST_CASE("power moment evaluator matches a hand value") {
    auto p = SpectralMeasure({{1.0, 0.5}, {4.0, 0.5}});
    // E[P/(1+P rho)] at rho = i: 0.5/(1+i) + 2/(1+4i).
    auto v = eval_calP(p, cplx(0.0, 1.0));
    CHECK(std::abs(v - cplx(0.36764705882352944, -0.7205882352941176)) < 1e-15);
    CHECK_THROWS_AS(eval_calP(p, cplx(-1.0, 0.0)), EvaluationPole);
}

TEST_CASE("channel moment evaluator matches a hand value") {
    JointChannelMeasure chan(2, {{{1.0, 2.0}, 0.5}, {{3.0, 1.0}, 0.5}});
    std::vector<cplx> w = {cplx(0.5, 0.0), cplx(0.25, 0.0)};
    cplx z(-1.0, 0.5);
    // E[ h_j / (-z + w.h) ] computed atom by atom.
    cplx expect = 0.0;
    {
        cplx dot1 = 0.5 * 1.0 + 0.25 * 2.0;
        cplx dot2 = 0.5 * 3.0 + 0.25 * 1.0;
        expect = 0.5 * 1.0 / (-z + dot1) + 0.5 * 3.0 / (-z + dot2);
    }
    CHECK(std::abs(eval_calH(chan, 0, w, z) - expect) < 1e-15);
    CHECK_THROWS_AS(eval_calH(chan, 2, w, z), InvalidDimensions);
    CHECK_THROWS_AS(eval_calH(chan, 0, {cplx(1.0, 0.0)}, z), InvalidDimensions);
}

TEST_CASE("equal-power iid system matches the classical closed form") {
    const double eps = 1e-8;
    for (double alpha : {0.5, 1.0, 1.5}) {
        for (double power : {0.5, 1.0, 4.0}) {
            for (double sigma2 : {0.1, 0.5, 1.0}) {
                auto sc = equal_power_scenario(alpha, power, sigma2, SignatureKind::iid);
                auto st = solve_theorem1(sc, HalfPlanePoint(-sigma2, eps));
                REQUIRE(st.converged);
                double ref = equal_power_reference(alpha, power, sigma2);
                CHECK(st.rho[0].real() == doctest::Approx(ref).epsilon(1e-8));
                CHECK(std::abs(st.rho[0].imag()) < 1e-6);
            }
        }
    }
}

TEST_CASE("unit-load unit-power system reproduces the frozen output level") {
    auto sc = equal_power_scenario(1.0, 1.0, 0.1, SignatureKind::iid);
    double s = sinr(sc, 1.0, 0);
    CHECK(s == doctest::Approx((std::sqrt(41.0) - 1.0) / 2.0).epsilon(1e-9));
    CHECK(10.0 * std::log10(s) == doctest::Approx(4.31614957996112).epsilon(1e-9));
}

TEST_CASE("flat iid system matches the frozen single-transmitter values") {
    // J=1, unit power and channel: G solves z*rho^2 + (1+z-alpha)*rho + 1 = 0.
    struct Row {
        double alpha;
        cplx g;
    };
    const Row rows[] = {
        {0.25, {0.90813304399086192, 0.81359307630858035}},
        {0.75, {0.75849361299827744, 0.52475964116940166}},
        {1.50, {0.57944585721127861, 0.26713275593045888}},
    };
    for (const auto& row : rows) {
        auto sc = equal_power_scenario(row.alpha, 1.0, 0.0, SignatureKind::iid);
        auto st = solve_theorem1(sc, HalfPlanePoint(-0.5, 0.5));
        REQUIRE(st.converged);
        CHECK(std::abs(st.g - row.g) < 1e-10);
        CHECK(st.residual < 1e-10);
    }
}

TEST_CASE("isometric single transmitter projects exactly") {
    // J=1 isometric, alpha=1/2, P=4, flat channel: the correlation matrix is
    // sigma2 + 4 on half the directions, so G(z) = (1/2)(-1/z) + (1/2)/(4-z).
    CdmaScenario sc{{{0.5, SignatureKind::isometric, point_mass(4.0)}},
                    joint_independent({point_mass(1.0)}),
                    0.0};
    HalfPlanePoint z(1.7, 0.6);
    auto st = solve_theorem1(sc, z);
    REQUIRE(st.converged);
    cplx zv = z.value();
    CHECK(std::abs(st.g - (0.5 * (-1.0 / zv) + 0.5 / (4.0 - zv))) < 1e-10);
}

TEST_CASE("isometric system close to the real axis via continuation") {
    CdmaScenario sc{{{0.5, SignatureKind::isometric, point_mass(4.0)}},
                    joint_independent({point_mass(1.0)}),
                    0.0};
    auto st = solve_theorem1(sc, HalfPlanePoint(-2.25, 1e-8));
    REQUIRE(st.converged);
    CHECK(st.rho[0].real() == doctest::Approx(4.0 / 9.0).epsilon(1e-7));
    CHECK(st.tau[0].real() == doctest::Approx(16.0 / 17.0).epsilon(1e-7));
}

TEST_CASE("mixed signature kinds converge to solver tolerance") {
    auto e = discretize_family(ExponentialFamily{1.0}, 64);
    CdmaScenario sc{{{0.5, SignatureKind::iid, point_mass(1.0)},
                     {0.5, SignatureKind::isometric, point_mass(1.0)}},
                    joint_independent({e, e}),
                    0.1};
    auto st = solve_theorem1(sc, HalfPlanePoint(-0.5, 0.5));
    REQUIRE(st.converged);
    CHECK(st.residual < 1e-10);
    CHECK(st.g.imag() > 0.0);
    for (int j = 0; j < 2; ++j) {
        CHECK(st.rho[j].imag() > 0.0);
        CHECK(st.tau[j].imag() > 0.0);
    }
    CHECK(st.pbar[0] == doctest::Approx(1.0));
}

TEST_CASE("vanishing isometric load approaches the iid limit") {
    auto e = discretize_family(ExponentialFamily{1.0}, 256);
    HalfPlanePoint z(-0.1, 1e-8);
    CdmaScenario iso{{{1e-6, SignatureKind::isometric, point_mass(1.0)}},
                     joint_independent({e}), 0.0};
    CdmaScenario iid{{{1e-6, SignatureKind::iid, point_mass(1.0)}},
                     joint_independent({e}), 0.0};
    auto a = solve_theorem1(iso, z);
    auto b = solve_theorem1(iid, z);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(std::abs(a.rho[0] - b.rho[0]) < 1e-4);
}

TEST_CASE("output interface guards its arguments") {
    auto sc = equal_power_scenario(0.5, 1.0, 0.1, SignatureKind::iid);
    CHECK_THROWS_AS(sinr(sc, 1.0, 3), InvalidDimensions);
    CHECK_THROWS_AS(sinr(sc, 1.0, 0, -1e-8), InvalidGrid);
}

TEST_CASE("noise-free unit load has no MMSE fixed point on the axis") {
    // alpha=1, P=1, sigma2=0 places the evaluation point at the spectral edge:
    // rho keeps a macroscopic imaginary part as epsilon shrinks.
    auto sc = equal_power_scenario(1.0, 1.0, 0.0, SignatureKind::iid);
    CHECK_THROWS_AS(sinr(sc, 1.0, 0), SpectralEdge);
}

TEST_CASE("output sweep is monotone in operating point") {
    auto e = discretize_family(ExponentialFamily{1.0}, 64);
    CdmaScenario sc{{{0.5, SignatureKind::iid, point_mass(1.0)}},
                    joint_independent({e}), 1.0};
    std::vector<double> snrs = {0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
    auto rows = sinr_sweep(sc, snrs);
    REQUIRE(rows.size() == snrs.size());
    double prev = -1e9;
    for (const auto& row : rows) {
        REQUIRE(row.status == "ok");
        CHECK(row.transmitter == 0);
        CHECK(row.sinr_db > prev);
        prev = row.sinr_db;
    }
    // High-noise SINR approaches pbar/sigma2 from below.
    CHECK(rows[0].sinr_db < 0.0);
    CHECK(rows.back().sinr_db < 20.0);
}

TEST_CASE("ambiguity probe accepts an interior point") {
    auto e = discretize_family(ExponentialFamily{1.0}, 32);
    CdmaScenario sc{{{0.75, SignatureKind::iid, point_mass(1.0)}},
                    joint_independent({e}), 0.0};
    SolverConfig cfg;
    cfg.check_ambiguity = true;
    auto st = solve_theorem1(sc, HalfPlanePoint(-0.5, 1.0), cfg);
    CHECK(st.converged);
}
