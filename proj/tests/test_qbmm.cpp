#include <doctest.h>

#include <cmath>

#include "hqmom/errors.hpp"
#include "hqmom/qbmm.hpp"
#include "hqmom/rng.hpp"

using namespace hqmom;

namespace {

const MomentSet kExample{1.0, 0.0, 1.01, 0.0, 0.04};  // sigma_R=0.1, alpha=0, sigma_Rd=0.2

MomentSet random_realizable(Rng& rng) {
    // Build from a random mean/covariance so realizability holds by
    // construction, with the radius kept well positive.
    const double m1 = rng.uniform(0.5, 2.0);
    const double m2 = rng.uniform(-0.5, 0.5);
    const double sr = rng.uniform(0.01, 0.2);
    const double srd = rng.uniform(0.01, 0.5);
    const double rho = rng.uniform(-0.9, 0.9);
    MomentSet m;
    m.mu10 = m1;
    m.mu01 = m2;
    m.mu20 = m1 * m1 + sr * sr;
    m.mu11 = m1 * m2 + rho * sr * srd;
    m.mu02 = m2 * m2 + srd * srd;
    return m;
}

}  // namespace

TEST_CASE("chyqmom4_invert reproduces the worked 4-node example") {
    const Quadrature q = chyqmom4_invert(kExample, 4);
    REQUIRE(q.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(q.weights[k] == 0.25);
    CHECK(q.xi1[0] == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(q.xi1[1] == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(q.xi1[2] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(q.xi1[3] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(q.xi2[0] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(q.xi2[1] == doctest::Approx(-0.2).epsilon(1e-13));
    CHECK(q.xi2[2] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(q.xi2[3] == doctest::Approx(-0.2).epsilon(1e-13));
}

TEST_CASE("padding adds zero-weight nodes at the mean") {
    const Quadrature q = chyqmom4_invert(kExample, 6);
    REQUIRE(q.size() == 6);
    for (int k = 4; k < 6; ++k) {
        CHECK(q.weights[k] == 0.0);
        CHECK(q.xi1[k] == 1.0);
        CHECK(q.xi2[k] == 0.0);
    }
}

TEST_CASE("inversion round-trip recovers the carried moments") {
    Rng rng(std::uint64_t{2024});
    for (int trial = 0; trial < 1000; ++trial) {
        const MomentSet m = random_realizable(rng);
        const Quadrature q = chyqmom4_invert(m, 4);
        const auto check = [&](double value, double expected) {
            CHECK(std::abs(value - expected) <=
                  1e-12 * std::max(1.0, std::abs(expected)));
        };
        check(project_moment(q, 0, 0), 1.0);
        check(project_moment(q, 1, 0), m.mu10);
        check(project_moment(q, 0, 1), m.mu01);
        check(project_moment(q, 2, 0), m.mu20);
        check(project_moment(q, 1, 1), m.mu11);
        check(project_moment(q, 0, 2), m.mu02);
    }
}

TEST_CASE("non-realizable moment sets raise typed errors with the discriminant") {
    MomentSet m = kExample;
    m.mu20 = m.mu10 * m.mu10;  // zero radius variance
    CHECK_THROWS_AS(chyqmom4_invert(m), NonRealizableError);
    try {
        chyqmom4_invert(m);
    } catch (const NonRealizableError& e) {
        CHECK(e.discriminant <= 0.0);
    }
    MomentSet m2 = kExample;
    m2.mu02 = -0.01;
    CHECK_THROWS_AS(chyqmom4_invert(m2), NonRealizableError);
}

TEST_CASE("clamped inversion recovers instead of throwing") {
    MomentSet m = kExample;
    m.mu20 = m.mu10 * m.mu10;
    const Quadrature q = chyqmom4_invert(m, 4, true);
    CHECK(project_moment(q, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("project_moment worked examples") {
    const Quadrature q = chyqmom4_invert(kExample, 4);
    CHECK(project_moment(q, 1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(project_moment(q, 0, 2) == doctest::Approx(0.04).epsilon(1e-13));
    const double expected =
        0.25 * (2.0 * std::pow(1.1, -1.2) + 2.0 * std::pow(0.9, -1.2));
    CHECK(project_moment(q, -1.2, 0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(1.01335).epsilon(1e-5));
}

TEST_CASE("project_moment: zero-weight degenerate nodes are ignored") {
    Quadrature q;
    q.weights = {1.0, 0.0};
    q.xi1 = {1.5, -3.0};
    q.xi2 = {0.2, 7.0};
    CHECK(project_moment(q, -1.2, 0) == doctest::Approx(std::pow(1.5, -1.2)));
}

TEST_CASE("project_moment: weighted node with xi1 <= 0 and fractional power throws") {
    Quadrature q;
    q.weights = {0.5, 0.5};
    q.xi1 = {1.0, -0.2};
    q.xi2 = {0.0, 0.0};
    CHECK_THROWS_AS(project_moment(q, -1.2, 0), DomainError);
    CHECK(project_moment(q, 2, 0) == doctest::Approx(0.5 * (1.0 + 0.04)));
}

TEST_CASE("translation equivariance in xi2") {
    Rng rng(std::uint64_t{5});
    for (int trial = 0; trial < 50; ++trial) {
        const MomentSet m = random_realizable(rng);
        const double c = rng.uniform(-1.0, 1.0);
        MomentSet shifted;
        shifted.mu10 = m.mu10;
        shifted.mu01 = m.mu01 + c;
        shifted.mu20 = m.mu20;
        shifted.mu11 = m.mu11 + c * m.mu10;
        shifted.mu02 = m.mu02 + 2.0 * c * m.mu01 + c * c;
        const Quadrature q0 = chyqmom4_invert(m, 4);
        const Quadrature q1 = chyqmom4_invert(shifted, 4);
        for (int k = 0; k < 4; ++k) {
            CHECK(q1.weights[k] == q0.weights[k]);
            CHECK(q1.xi1[k] == doctest::Approx(q0.xi1[k]).epsilon(1e-12));
            CHECK(q1.xi2[k] == doctest::Approx(q0.xi2[k] + c).epsilon(1e-10));
        }
    }
}

TEST_CASE("padding neutrality for projections") {
    Rng rng(std::uint64_t{6});
    for (int trial = 0; trial < 50; ++trial) {
        const MomentSet m = random_realizable(rng);
        const Quadrature q4 = chyqmom4_invert(m, 4);
        const Quadrature q7 = chyqmom4_invert(m, 7);
        for (const auto& [i, j] : std::vector<std::pair<double, int>>{
                 {1, 0}, {0, 1}, {2, 0}, {-1.2, 0}, {-4, 1}, {3, 2}})
            CHECK(project_moment(q4, i, j) == project_moment(q7, i, j));
    }
}

TEST_CASE("transport_rhs: equilibrium delta is stationary") {
    Quadrature q;
    q.weights = {1.0};
    q.xi1 = {1.0};
    q.xi2 = {0.0};
    const auto d = transport_rhs(q, 1.0, PhysParams{});
    for (double v : d) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("transport_rhs: equilibrium delta under cp = 2") {
    Quadrature q;
    q.weights = {1.0};
    q.xi1 = {1.0};
    q.xi2 = {0.0};
    const auto d = transport_rhs(q, 2.0, PhysParams{});
    CHECK(d[0] == 0.0);
    CHECK(d[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(d[2] == 0.0);
    CHECK(d[3] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(d[4] == 0.0);
}

TEST_CASE("transport_rhs matches an independent node sum") {
    const PhysParams p{1e3, 1.4};
    const Quadrature q = chyqmom4_invert(kExample, 4);
    const double cp = 1.0;
    const double g = 3.0 * p.gamma;
    // Direct brute-force sums over the four nodes.
    double s[5] = {0, 0, 0, 0, 0};
    for (int k = 0; k < 4; ++k) {
        const double w = q.weights[k], x = q.xi1[k], v = q.xi2[k];
        s[0] += w * v;
        s[1] += w * (-1.5 * v * v / x - (4.0 / p.reynolds) * v / (x * x) +
                     std::pow(x, -g - 1.0) - cp / x);
        s[2] += w * 2.0 * x * v;
        s[3] += w * (-0.5 * v * v - (4.0 / p.reynolds) * v / x + std::pow(x, -g));
        s[4] += w * (-3.0 * v * v * v / x - (8.0 / p.reynolds) * v * v / (x * x) +
                     2.0 * std::pow(x, -g - 1.0) * v - 2.0 * cp * v / x);
    }
    s[3] -= cp;
    const auto d = transport_rhs(q, cp, p);
    for (int c = 0; c < 5; ++c)
        CHECK(std::abs(d[c] - s[c]) <= 1e-14 * std::max(1.0, std::abs(s[c])));
}

TEST_CASE("kinematic consistency of the transport rhs") {
    Rng rng(std::uint64_t{9});
    const PhysParams p{1e3, 1.4};
    for (int trial = 0; trial < 20; ++trial) {
        const MomentSet m = random_realizable(rng);
        const Quadrature q = chyqmom4_invert(m, 4);
        const auto d = transport_rhs(q, 1.2, p);
        CHECK(d[0] == project_moment(q, 0, 1));
        CHECK(d[2] == 2.0 * project_moment(q, 1, 1));
    }
}

TEST_CASE("printed-exponent mode reduces to generic at gamma = 1") {
    const Quadrature q = chyqmom4_invert(kExample, 4);
    const PhysParams p{1e3, 1.0};
    const auto a = transport_rhs(q, 1.1, p, TransportExponents::Generic);
    const auto b = transport_rhs(q, 1.1, p, TransportExponents::PrintedGamma1);
    for (int c = 0; c < 5; ++c) CHECK(a[c] == b[c]);
}

TEST_CASE("target_moments worked examples") {
    Quadrature delta;
    delta.weights = {1.0};
    delta.xi1 = {1.0};
    delta.xi2 = {0.0};
    const auto t = target_moments(delta, 1.4);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == 0.0);
    CHECK(t[2] == 0.0);
    CHECK(t[3] == 1.0);

    const Quadrature q = chyqmom4_invert(kExample, 4);
    const auto tq = target_moments(q, 1.4);
    CHECK(tq[0] == doctest::Approx(0.25 * (2 * 1.331 + 2 * 0.729)).epsilon(1e-13));
    CHECK(tq[0] == doctest::Approx(1.03).epsilon(1e-12));

    // gamma = 1 degenerates the bubble-wall moment to mu00.
    CHECK(target_moments(q, 1.0)[3] == doctest::Approx(1.0).epsilon(1e-14));
}
