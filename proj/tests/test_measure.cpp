#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmtspec/measure.hpp"

#include <cmath>
#include <vector>

using namespace rmtspec;

TEST_CASE("atoms are sorted, merged, and normalized") {
    SpectralMeasure m({{2.0, 0.25}, {-1.0, 0.5}, {2.0, 0.25}});
    CHECK(m.size() == 2);
    CHECK(m.atoms()[0].location == doctest::Approx(-1.0));
    CHECK(m.atoms()[0].weight == doctest::Approx(0.5));
    CHECK(m.atoms()[1].location == doctest::Approx(2.0));
    CHECK(m.atoms()[1].weight == doctest::Approx(0.5));
    CHECK(m.min_location() == doctest::Approx(-1.0));
    CHECK(m.max_location() == doctest::Approx(2.0));
    CHECK(m.support_bound() == doctest::Approx(2.0));
    CHECK(m.mean() == doctest::Approx(0.5));
}

TEST_CASE("near-coincident atoms merge by weighted average") {
    double loc = 1.0;
    SpectralMeasure m({{loc, 0.75}, {loc * (1.0 + 1e-14), 0.25}});
    CHECK(m.size() == 1);
    CHECK(m.atoms()[0].weight == doctest::Approx(1.0));
    CHECK(m.atoms()[0].location == doctest::Approx(loc).epsilon(1e-12));
}

TEST_CASE("invalid atom lists are rejected") {
    CHECK_THROWS_AS(SpectralMeasure({}), InvalidMeasure);
    CHECK_THROWS_AS(SpectralMeasure({{0.0, -0.5}, {1.0, 1.5}}), InvalidMeasure);
    CHECK_THROWS_AS(SpectralMeasure({{0.0, 0.0}, {1.0, 1.0}}), InvalidMeasure);
    CHECK_THROWS_AS(SpectralMeasure({{0.0, 0.3}, {1.0, 0.3}}), InvalidMeasure);
    CHECK_THROWS_AS(SpectralMeasure({{std::nan(""), 1.0}}), InvalidMeasure);
    CHECK_THROWS_AS(SpectralMeasure({{0.0, std::nan("")}}), InvalidMeasure);
}

TEST_CASE("point mass and sampling constructors") {
    auto pm = point_mass(3.5);
    CHECK(pm.size() == 1);
    CHECK(pm.mean() == doctest::Approx(3.5));

    auto fs = from_samples({1.0, 1.0, 2.0, 4.0});
    CHECK(fs.size() == 3);
    CHECK(fs.atoms()[0].weight == doctest::Approx(0.5));
    CHECK(fs.mean() == doctest::Approx(2.0));
    CHECK_THROWS_AS(from_samples({}), InvalidMeasure);
}

TEST_CASE("exponential quantile discretization matches reference means") {
    struct Row {
        int atom_count;
        double mean;
    };
    // Midpoint-quantile means of a unit-mean exponential; the defect decays
    // like log(M)/M because of the unbounded right tail.
    const Row rows[] = {
        {64, 0.99459491},
        {256, 0.99864677},
        {1024, 0.99966151},
    };
    double prev_err = 1.0;
    for (const auto& row : rows) {
        auto m = discretize_family(ExponentialFamily{1.0}, row.atom_count);
        CHECK(m.size() == row.atom_count);
        CHECK(m.mean() == doctest::Approx(row.mean).epsilon(1e-7));
        double err = std::abs(m.mean() - 1.0);
        CHECK(err < prev_err);
        prev_err = err;
        CHECK(m.min_location() > 0.0);
    }
    auto scaled = discretize_family(ExponentialFamily{2.5}, 256);
    CHECK(scaled.mean() == doctest::Approx(2.5 * 0.99864677).epsilon(1e-7));
}

TEST_CASE("uniform family quantiles") {
    auto m = discretize_family(UniformFamily{-1.0, 3.0}, 4);
    CHECK(m.size() == 4);
    CHECK(m.atoms()[0].location == doctest::Approx(-0.5));
    CHECK(m.atoms()[3].location == doctest::Approx(2.5));
    CHECK(m.mean() == doctest::Approx(1.0));
    CHECK_THROWS_AS(discretize_family(UniformFamily{2.0, 2.0}, 4), InvalidMeasure);
}

TEST_CASE("semicircle family is symmetric with matching variance") {
    auto m = discretize_family(SemicircleFamily{2.0}, 512);
    CHECK(m.mean() == doctest::Approx(0.0).epsilon(1e-10));
    double var = 0.0;
    for (const auto& a : m.atoms()) var += a.weight * a.location * a.location;
    CHECK(var == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(m.max_location() < 2.0 * std::sqrt(2.0));
    CHECK(m.min_location() > -2.0 * std::sqrt(2.0));
    for (std::size_t k = 0; k < m.size(); ++k) {
        const auto& left = m.atoms()[k];
        const auto& right = m.atoms()[m.size() - 1 - k];
        CHECK(left.location == doctest::Approx(-right.location).epsilon(1e-9));
    }
    CHECK_THROWS_AS(discretize_family(SemicircleFamily{0.0}, 16), InvalidMeasure);
}

TEST_CASE("bernoulli family is exact at any atom count") {
    auto m = discretize_family(BernoulliFamily{0.25, -1.0, 3.0}, 64);
    CHECK(m.size() == 2);
    CHECK(m.atoms()[0].location == doctest::Approx(-1.0));
    CHECK(m.atoms()[0].weight == doctest::Approx(0.75));
    CHECK(m.atoms()[1].weight == doctest::Approx(0.25));

    auto degenerate = discretize_family(BernoulliFamily{0.0, -1.0, 3.0}, 8);
    CHECK(degenerate.size() == 1);
    CHECK(degenerate.mean() == doctest::Approx(-1.0));
    CHECK_THROWS_AS(discretize_family(BernoulliFamily{1.5, 0.0, 1.0}, 8), InvalidMeasure);
    CHECK_THROWS_AS(discretize_family(BernoulliFamily{0.5, 2.0, 1.0}, 8), InvalidMeasure);
}

TEST_CASE("atom count must be positive") {
    CHECK_THROWS_AS(discretize_family(ExponentialFamily{1.0}, 0), InvalidMeasure);
}

TEST_CASE("joint measure validates and sorts") {
    JointChannelMeasure j(2, {{{2.0, 1.0}, 0.5}, {{1.0, 3.0}, 0.5}});
    CHECK(j.dimension() == 2);
    CHECK(j.atoms()[0].h[0] == doctest::Approx(1.0));
    CHECK(j.max_gain(0) == doctest::Approx(2.0));
    CHECK(j.max_gain(1) == doctest::Approx(3.0));
    CHECK_THROWS_AS(JointChannelMeasure(2, {{{1.0}, 1.0}}), InvalidMeasure);
    CHECK_THROWS_AS(JointChannelMeasure(1, {{{-1.0}, 1.0}}), InvalidMeasure);
    CHECK_THROWS_AS(JointChannelMeasure(1, {{{1.0}, 0.7}}), InvalidMeasure);
}

TEST_CASE("joint_independent reproduces its marginals exactly") {
    auto m0 = SpectralMeasure({{0.5, 0.25}, {1.5, 0.75}});
    auto m1 = SpectralMeasure({{1.0, 0.4}, {2.0, 0.35}, {4.0, 0.25}});
    auto j = joint_independent({m0, m1});
    CHECK(j.dimension() == 2);
    CHECK(j.atoms().size() == 6);
    double wsum = 0.0;
    for (const auto& a : j.atoms()) wsum += a.weight;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));

    for (std::size_t dim = 0; dim < 2; ++dim) {
        auto marg = j.marginal(dim);
        const auto& ref = dim == 0 ? m0 : m1;
        REQUIRE(marg.size() == ref.size());
        for (std::size_t k = 0; k < ref.size(); ++k) {
            CHECK(marg.atoms()[k].location == doctest::Approx(ref.atoms()[k].location).epsilon(1e-14));
            CHECK(marg.atoms()[k].weight == doctest::Approx(ref.atoms()[k].weight).epsilon(1e-14));
        }
    }
}

TEST_CASE("joint_independent enforces the atom budget") {
    auto big = discretize_family(UniformFamily{0.0, 1.0}, 1200);
    CHECK_THROWS_AS(joint_independent({big, big}), MeasureTooLarge);
    auto j = joint_independent({big, big}, 2000000);
    CHECK(j.atoms().size() == 1440000);
}
