#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gapbound/linalg.hpp"
#include "gapbound/ode.hpp"

#include <cmath>

using namespace gapbound;

namespace {

OdeSystem scalar_decay() {
    return {1, [](double, const Vector& x, const Vector&) { return Vector(-x); }};
}

OdeSystem harmonic_oscillator() {
    return {2, [](double, const Vector& x, const Vector&) {
                Vector dx(2);
                dx << x[1], -x[0];
                return dx;
            }};
}

} // namespace

TEST_CASE("integrate: scalar exponential decay") {
    Vector x0(1);
    x0 << 1.0;
    auto traj = integrate(scalar_decay(), x0, 0.0, 1.0, Vector());
    CHECK(traj.sample(1.0)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("integrate: harmonic oscillator closes after one period") {
    Vector x0(2);
    x0 << 1.0, 0.0;
    auto traj = integrate(harmonic_oscillator(), x0, 0.0, 2.0 * M_PI, Vector());
    Vector x_end = traj.sample(2.0 * M_PI);
    CHECK(std::abs(x_end[0] - 1.0) < 1e-6);
    CHECK(std::abs(x_end[1]) < 1e-6);
}

TEST_CASE("integrate: dense output is exact at nodes and accurate between") {
    Vector x0(1);
    x0 << 1.0;
    auto traj = integrate(scalar_decay(), x0, 0.0, 2.0, Vector());

    const std::size_t mid = traj.times.size() / 2;
    Vector at_node = traj.sample(traj.times[mid]);
    CHECK(at_node[0] == traj.states[mid][0]);

    for (int i = 0; i <= 40; ++i) {
        const double t = 2.0 * i / 40.0;
        CHECK(traj.sample(t)[0] == doctest::Approx(std::exp(-t)).epsilon(1e-7));
    }

    CHECK_THROWS_AS(traj.sample(-0.5), std::out_of_range);
    CHECK_THROWS_AS(traj.sample(2.5), std::out_of_range);
}

TEST_CASE("integrate: repeated runs are bit-identical") {
    Vector x0(2);
    x0 << 0.3, -0.7;
    auto first = integrate(harmonic_oscillator(), x0, 0.0, 5.0, Vector());
    auto second = integrate(harmonic_oscillator(), x0, 0.0, 5.0, Vector());
    REQUIRE(first.times.size() == second.times.size());
    for (std::size_t i = 0; i < first.times.size(); ++i) {
        CHECK(first.times[i] == second.times[i]);
        CHECK(first.states[i] == second.states[i]);
    }
}

TEST_CASE("integrate: precondition failures throw invalid_argument") {
    Vector x0(1);
    x0 << 1.0;
    Vector wrong(2);
    wrong << 1.0, 2.0;
    CHECK_THROWS_AS(integrate(scalar_decay(), wrong, 0.0, 1.0, Vector()), std::invalid_argument);
    CHECK_THROWS_AS(integrate(scalar_decay(), x0, 1.0, 1.0, Vector()), std::invalid_argument);
    IntegratorOptions bad;
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(integrate(scalar_decay(), x0, 0.0, 1.0, Vector(), bad), std::invalid_argument);
}

TEST_CASE("integrate: non-finite rhs values throw domain_error") {
    OdeSystem blowup{1, [](double t, const Vector& x, const Vector&) {
                         Vector dx(1);
                         dx[0] = (t > 0.5) ? std::numeric_limits<double>::quiet_NaN() : -x[0];
                         return dx;
                     }};
    Vector x0(1);
    x0 << 1.0;
    CHECK_THROWS_AS(integrate(blowup, x0, 0.0, 1.0, Vector()), std::domain_error);
}

TEST_CASE("integrate_fixed: halving the step cuts error by at least 2^3") {
    Vector x0(2);
    x0 << 1.0, 0.0;
    auto sys = harmonic_oscillator();

    auto error_at = [&](double step) {
        auto traj = integrate_fixed(sys, x0, 0.0, 2.0 * M_PI, Vector(), step);
        Vector x_end = traj.states.back();
        Vector expect(2);
        expect << 1.0, 0.0;
        return (x_end - expect).norm();
    };

    const double coarse = error_at(0.1);
    const double fine = error_at(0.05);
    CHECK(fine * 8.0 <= coarse);
}

TEST_CASE("integrate_fixed: lands exactly on the requested end time") {
    Vector x0(1);
    x0 << 1.0;
    auto traj = integrate_fixed(scalar_decay(), x0, 0.0, 1.0, Vector(), 0.3);
    CHECK(traj.times.back() == 1.0);
    CHECK(traj.states.back()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("integrate_ltv: constant coefficients match the closed form") {
    Matrix a(2, 2);
    a << 0.0, 1.0, -2.0, -3.0;
    Vector u(2);
    u << 0.0, 1.0;

    auto traj = integrate_ltv([&a](double) { return a; }, [&u](double) { return u; }, 2, 0.0, 3.0);

    for (double t : {0.5, 1.0, 2.0, 3.0}) {
        Vector expect = a.fullPivLu().solve(Vector((expm(Matrix(a * t)) - Matrix::Identity(2, 2)) * u));
        Vector got = traj.sample(t);
        CHECK((got - expect).norm() < 1e-7);
    }
}

TEST_CASE("integrate_ltv: response is linear in the forcing") {
    Matrix a(2, 2);
    a << 0.0, 1.0, -2.0, -3.0;
    Vector u(2);
    u << 0.3, 1.0;
    Vector u2 = 2.0 * u;

    auto single = integrate_ltv([&a](double) { return a; },
                                [&u](double t) { return Vector(std::cos(t) * u); }, 2, 0.0, 4.0);
    auto doubled = integrate_ltv([&a](double) { return a; },
                                 [&u2](double t) { return Vector(std::cos(t) * u2); }, 2, 0.0, 4.0);

    for (double t : {1.0, 2.0, 4.0}) {
        CHECK((doubled.sample(t) - 2.0 * single.sample(t)).norm() < 1e-7);
    }
}

TEST_CASE("integrate_ltv: starts from the zero state") {
    Matrix a = -Matrix::Identity(2, 2);
    Vector u = Vector::Ones(2);
    auto traj = integrate_ltv([&a](double) { return a; }, [&u](double) { return u; }, 2, 0.0, 1.0);
    CHECK(traj.states.front().norm() == 0.0);
}
